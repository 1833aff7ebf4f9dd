//! Real-valued time and the clocks that drive a session.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Sub};
use std::time::{Duration, Instant};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TimeError {
    #[error("time value {0} is not finite")]
    NotFinite(f64),
    #[error("time value {0} is negative")]
    Negative(f64),
}

/// A non-negative, finite number of seconds.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Seconds(f64);

impl Seconds {
    pub const ZERO: Seconds = Seconds(0.0);

    pub fn new(value: f64) -> Result<Self, TimeError> {
        if !value.is_finite() {
            return Err(TimeError::NotFinite(value));
        }
        if value < 0.0 {
            return Err(TimeError::Negative(value));
        }
        // normalise -0.0
        Ok(Seconds(value + 0.0))
    }

    /// Panics on invalid input. Meant for literals and values already known to be valid.
    pub fn from_secs(value: f64) -> Self {
        Self::new(value).expect("invalid seconds literal")
    }

    pub fn get(self) -> f64 {
        self.0
    }

    pub fn from_millis(ms: u64) -> Self {
        Seconds(ms as f64 / 1000.0)
    }

    /// Rounded to the nearest millisecond.
    pub fn as_millis(self) -> u64 {
        (self.0 * 1000.0).round() as u64
    }

    /// Number of whole seconds needed to cover this span, i.e. `ceil(value)`.
    pub fn whole_seconds(self) -> usize {
        self.0.ceil() as usize
    }

    pub fn max(self, other: Seconds) -> Seconds {
        if other.0 > self.0 {
            other
        } else {
            self
        }
    }

    pub fn min(self, other: Seconds) -> Seconds {
        if other.0 < self.0 {
            other
        } else {
            self
        }
    }

    /// `self - other`, clamped at zero.
    pub fn saturating_sub(self, other: Seconds) -> Seconds {
        Seconds((self.0 - other.0).max(0.0))
    }

    pub fn as_duration(self) -> Duration {
        Duration::from_secs_f64(self.0)
    }
}

impl Eq for Seconds {}

impl PartialOrd for Seconds {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Seconds {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

impl Add for Seconds {
    type Output = Seconds;

    fn add(self, rhs: Seconds) -> Seconds {
        Seconds(self.0 + rhs.0)
    }
}

impl Sub for Seconds {
    type Output = Seconds;

    fn sub(self, rhs: Seconds) -> Seconds {
        self.saturating_sub(rhs)
    }
}

impl fmt::Display for Seconds {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl TryFrom<f64> for Seconds {
    type Error = TimeError;

    fn try_from(value: f64) -> Result<Self, Self::Error> {
        Seconds::new(value)
    }
}

/// Time source for a session. `now` never decreases.
pub trait Clock: Send {
    fn now(&self) -> Seconds;

    /// Move the clock forward to `t`. Targets in the past are a no-op.
    fn advance_to(&mut self, t: Seconds);
}

/// Instantaneous clock for offline and deterministic runs.
#[derive(Debug, Default, Clone)]
pub struct SimulatedClock {
    now: Seconds,
}

impl SimulatedClock {
    pub fn new() -> Self {
        Self::default()
    }
}

impl Clock for SimulatedClock {
    fn now(&self) -> Seconds {
        self.now
    }

    fn advance_to(&mut self, t: Seconds) {
        self.now = self.now.max(t);
    }
}

/// Clock tied to the wall: `advance_to` sleeps until the target offset from creation.
#[derive(Debug, Clone)]
pub struct WallClock {
    origin: Instant,
}

impl WallClock {
    pub fn new() -> Self {
        Self {
            origin: Instant::now(),
        }
    }
}

impl Default for WallClock {
    fn default() -> Self {
        Self::new()
    }
}

impl Clock for WallClock {
    fn now(&self) -> Seconds {
        Seconds(self.origin.elapsed().as_secs_f64())
    }

    fn advance_to(&mut self, t: Seconds) {
        let now = self.now();
        if t > now {
            std::thread::sleep((t - now).as_duration());
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_invalid_values() {
        assert_eq!(Seconds::new(-1.0), Err(TimeError::Negative(-1.0)));
        assert!(matches!(Seconds::new(f64::NAN), Err(TimeError::NotFinite(_))));
        assert!(matches!(
            Seconds::new(f64::INFINITY),
            Err(TimeError::NotFinite(_))
        ));
        assert_eq!(Seconds::new(-0.0).unwrap().get().to_bits(), 0.0f64.to_bits());
    }

    #[test]
    fn whole_seconds_is_ceiling() {
        assert_eq!(Seconds::from_secs(3.5).whole_seconds(), 4);
        assert_eq!(Seconds::from_secs(10.0).whole_seconds(), 10);
        assert_eq!(Seconds::ZERO.whole_seconds(), 0);
    }

    #[test]
    fn simulated_clock_is_monotone() {
        let mut clock = SimulatedClock::new();
        clock.advance_to(Seconds::from_secs(5.0));
        clock.advance_to(Seconds::from_secs(2.0));
        assert_eq!(clock.now(), Seconds::from_secs(5.0));
    }

    #[test]
    fn wall_clock_sleeps_forward() {
        let mut clock = WallClock::new();
        clock.advance_to(Seconds::from_secs(0.02));
        assert!(clock.now() >= Seconds::from_secs(0.02));
    }
}
