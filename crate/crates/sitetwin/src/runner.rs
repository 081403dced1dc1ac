//! Multi-threaded Monte-Carlo runner.
//!
//! Trials are cut into fixed-size chunks that workers claim from a shared
//! counter. Every trial draws from its own counter-based stream, and batches
//! are reassembled in trial order, so the result does not depend on the
//! number of workers or on scheduling.

use std::num::NonZeroUsize;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Mutex;
use std::thread;

use sitetwin_core::stochastic::{FinishDistribution, McsRunner, Simulation, StochasticError, TrialBatch};

/// Trials per work unit. Fixed so chunk boundaries never depend on workers.
pub const CHUNK_TRIALS: u64 = 2048;

#[derive(Debug, Clone, Copy)]
pub struct ThreadedRunner {
    pub workers: usize,
}

impl ThreadedRunner {
    pub fn new(workers: usize) -> Self {
        ThreadedRunner { workers: workers.max(1) }
    }

    /// One worker per available core.
    pub fn available() -> Self {
        Self::new(thread::available_parallelism().map_or(1, NonZeroUsize::get))
    }
}

impl Default for ThreadedRunner {
    fn default() -> Self {
        Self::available()
    }
}

impl McsRunner for ThreadedRunner {
    fn run(&self, sim: &Simulation<'_>, n_trials: u64) -> Result<FinishDistribution, StochasticError> {
        if n_trials == 0 {
            return Err(StochasticError::NoTrials);
        }
        let chunks = n_trials.div_ceil(CHUNK_TRIALS);
        let workers = (self.workers as u64).min(chunks) as usize;
        let next = AtomicU64::new(0);
        let out: Mutex<Vec<TrialBatch>> = Mutex::new(Vec::with_capacity(chunks as usize));
        thread::scope(|s| {
            for _ in 0..workers {
                s.spawn(|| loop {
                    let c = next.fetch_add(1, Ordering::Relaxed);
                    if c >= chunks {
                        break;
                    }
                    let lo = c * CHUNK_TRIALS;
                    let hi = (lo + CHUNK_TRIALS).min(n_trials);
                    let batch = sim.run_trials(lo..hi);
                    out.lock().expect("no worker panics while holding the lock").push(batch);
                });
            }
        });
        let batches = out.into_inner().expect("workers joined");
        Ok(FinishDistribution::from_batches(sim, batches))
    }
}
