use std::sync::{Condvar, Mutex};

use super::{BackendError, Generator, GeneratorRequest, GeneratorResponse};

/// Caps the number of in-flight calls to the wrapped generator; extra callers block.
pub struct Limited<G> {
    inner: G,
    max: usize,
    in_flight: Mutex<usize>,
    freed: Condvar,
}

impl<G> Limited<G> {
    pub fn new(inner: G, max: usize) -> Self {
        Self {
            inner,
            max: max.max(1),
            in_flight: Mutex::new(0),
            freed: Condvar::new(),
        }
    }

    pub fn inner(&self) -> &G {
        &self.inner
    }
}

struct Permit<'a> {
    in_flight: &'a Mutex<usize>,
    freed: &'a Condvar,
}

impl Drop for Permit<'_> {
    fn drop(&mut self) {
        let mut n = self.in_flight.lock().unwrap_or_else(|e| e.into_inner());
        *n -= 1;
        self.freed.notify_one();
    }
}

impl<G: Generator> Generator for Limited<G> {
    fn generate(&self, request: &GeneratorRequest) -> Result<GeneratorResponse, BackendError> {
        let _permit = {
            let mut n = self.in_flight.lock().unwrap_or_else(|e| e.into_inner());
            while *n >= self.max {
                n = self.freed.wait(n).unwrap_or_else(|e| e.into_inner());
            }
            *n += 1;
            Permit {
                in_flight: &self.in_flight,
                freed: &self.freed,
            }
        };
        self.inner.generate(request)
    }
}

#[cfg(test)]
mod tests {
    use super::super::test_support::request;
    use super::*;
    use crate::time::Seconds;
    use std::sync::atomic::{AtomicUsize, Ordering};
    use std::sync::Arc;
    use std::time::Duration;

    struct Slow {
        current: AtomicUsize,
        peak: AtomicUsize,
    }

    impl Generator for Slow {
        fn generate(&self, r: &GeneratorRequest) -> Result<GeneratorResponse, BackendError> {
            let now = self.current.fetch_add(1, Ordering::SeqCst) + 1;
            self.peak.fetch_max(now, Ordering::SeqCst);
            std::thread::sleep(Duration::from_millis(20));
            self.current.fetch_sub(1, Ordering::SeqCst);
            Ok(GeneratorResponse {
                raw_text: "x".into(),
                latency: Seconds::ZERO,
                model_id: r.model_id.clone(),
            })
        }
    }

    #[test]
    fn never_exceeds_limit() {
        let g = Arc::new(Limited::new(
            Slow {
                current: AtomicUsize::new(0),
                peak: AtomicUsize::new(0),
            },
            2,
        ));
        let handles: Vec<_> = (0..8)
            .map(|i| {
                let g = Arc::clone(&g);
                std::thread::spawn(move || g.generate(&request(i, "p")).unwrap())
            })
            .collect();
        for h in handles {
            h.join().unwrap();
        }
        assert!(g.inner().peak.load(Ordering::SeqCst) <= 2);
    }
}
