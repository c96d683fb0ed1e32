use std::sync::Mutex;
use std::time::{Duration, Instant};

/// Token bucket shared by every request of a run.
#[derive(Debug)]
pub struct RateLimiter {
    per_second: f64,
    capacity: f64,
    state: Mutex<(f64, Instant)>,
}

impl RateLimiter {
    /// `requests_per_minute <= 0` disables limiting. Bursts up to `burst` requests.
    pub fn new(requests_per_minute: f64, burst: u32) -> Self {
        let capacity = burst.max(1) as f64;
        RateLimiter {
            per_second: requests_per_minute.max(0.0) / 60.0,
            capacity,
            state: Mutex::new((capacity, Instant::now())),
        }
    }

    pub fn unlimited() -> Self {
        Self::new(0.0, 1)
    }

    /// Blocks until a request may be sent.
    pub fn acquire(&self) {
        if self.per_second <= 0.0 {
            return;
        }
        loop {
            let wait = {
                let mut state = self.state.lock().expect("rate limiter poisoned");
                let now = Instant::now();
                let (tokens, last) = *state;
                let tokens = (tokens + now.duration_since(last).as_secs_f64() * self.per_second).min(self.capacity);
                if tokens >= 1.0 {
                    *state = (tokens - 1.0, now);
                    return;
                }
                *state = (tokens, now);
                Duration::from_secs_f64((1.0 - tokens) / self.per_second)
            };
            std::thread::sleep(wait);
        }
    }
}
