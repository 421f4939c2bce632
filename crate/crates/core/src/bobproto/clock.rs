use std::time::{Duration, Instant};

pub const NS_PER_SEC: u64 = 1_000_000_000;

/// Monotonic time source in nanoseconds since the clock was created.
pub trait Clock {
    fn now_ns(&self) -> u64;
    /// Blocks (or jumps) until `t_ns`; no-op if already past.
    fn wait_until(&mut self, t_ns: u64);
    fn is_virtual(&self) -> bool;
}

/// Time advances only when told to.
#[derive(Debug, Default, Clone)]
pub struct VirtualClock {
    now_ns: u64,
}

impl VirtualClock {
    pub fn new() -> Self {
        Self::default()
    }
}

impl Clock for VirtualClock {
    fn now_ns(&self) -> u64 {
        self.now_ns
    }

    fn wait_until(&mut self, t_ns: u64) {
        self.now_ns = self.now_ns.max(t_ns);
    }

    fn is_virtual(&self) -> bool {
        true
    }
}

#[derive(Debug, Clone)]
pub struct RealClock {
    start: Instant,
}

impl Default for RealClock {
    fn default() -> Self {
        Self { start: Instant::now() }
    }
}

impl RealClock {
    pub fn new() -> Self {
        Self::default()
    }
}

impl Clock for RealClock {
    fn now_ns(&self) -> u64 {
        self.start.elapsed().as_nanos() as u64
    }

    fn wait_until(&mut self, t_ns: u64) {
        let now = self.now_ns();
        if t_ns > now {
            std::thread::sleep(Duration::from_nanos(t_ns - now));
        }
    }

    fn is_virtual(&self) -> bool {
        false
    }
}
