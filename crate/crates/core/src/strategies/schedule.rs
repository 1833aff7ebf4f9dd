use crate::media::{frames_between, FrameStore, FrameWindow, MediaError};
use crate::time::Seconds;
use crate::track::DecisionOutcome;

use super::config::{StrategyConfig, StrategyKind};

/// When the next query fires after a decision at `t_i`.
///
/// Fixed kinds poll every `step`. Realtime waits out the spoken utterance but
/// never polls faster than `step`.
pub fn next_decision_time(config: &StrategyConfig, t_i: Seconds, outcome: &DecisionOutcome) -> Seconds {
    match (config.kind, outcome) {
        (StrategyKind::Realtime, DecisionOutcome::Speak(u)) => t_i + config.step.max(u.est_duration()),
        _ => t_i + config.step,
    }
}

/// Frames shown at decision time `t_i`.
///
/// Fixed kinds see the last `step` seconds; Realtime sees everything since the
/// previous query.
pub fn select_window(
    config: &StrategyConfig,
    store: &FrameStore,
    t_i: Seconds,
    t_last_query: Seconds,
) -> Result<FrameWindow, MediaError> {
    let start = if config.kind.is_fixed_interval() {
        t_i - config.step
    } else {
        t_last_query.min(t_i)
    };
    frames_between(store, start, t_i, config.window_cap)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::Language;
    use crate::track::Utterance;

    fn cfg(kind: StrategyKind) -> StrategyConfig {
        StrategyConfig::new(kind, Language::En)
    }

    fn speak(dur: f64) -> DecisionOutcome {
        DecisionOutcome::Speak(
            Utterance::new("x", Language::En, Seconds::from_secs(10.0), Seconds::from_secs(dur))
                .unwrap(),
        )
    }

    #[test]
    fn fixed_ignores_outcome() {
        let t = Seconds::from_secs(10.0);
        let c = cfg(StrategyKind::Feedback);
        assert_eq!(next_decision_time(&c, t, &DecisionOutcome::Wait).get(), 12.0);
        assert_eq!(next_decision_time(&c, t, &speak(5.25)).get(), 12.0);
    }

    #[test]
    fn realtime_waits_out_speech() {
        let t = Seconds::from_secs(10.0);
        let c = cfg(StrategyKind::Realtime);
        assert_eq!(next_decision_time(&c, t, &speak(5.25)).get(), 15.25);
        assert_eq!(next_decision_time(&c, t, &speak(0.25)).get(), 12.0);
        assert_eq!(next_decision_time(&c, t, &DecisionOutcome::Wait).get(), 12.0);
    }

    #[test]
    fn windows() {
        let store = FrameStore::synthetic("v", Seconds::from_secs(60.0));
        let s = Seconds::from_secs;
        let w = select_window(&cfg(StrategyKind::Feedback), &store, s(6.0), s(4.0)).unwrap();
        assert_eq!(w.seconds(), vec![4, 5]);
        let w = select_window(&cfg(StrategyKind::Realtime), &store, s(15.25), s(10.0)).unwrap();
        assert_eq!(w.seconds(), (10..=15).collect::<Vec<_>>());
        for kind in StrategyKind::ALL {
            let w = select_window(&cfg(kind), &store, s(0.0), s(0.0)).unwrap();
            assert_eq!(w.seconds(), vec![0]);
        }
    }
}
