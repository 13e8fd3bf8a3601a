use crate::error::{Error, Result};
use crate::seeding::derive_seed;

/// One replica of a Monte Carlo experiment.
pub trait Experiment: Sync {
    type Output: Send;

    fn run(&self, replica: u64, seed: u64) -> Result<Self::Output>;
}

impl<F, T> Experiment for F
where
    F: Fn(u64, u64) -> Result<T> + Sync,
    T: Send,
{
    type Output = T;

    fn run(&self, replica: u64, seed: u64) -> Result<T> {
        self(replica, seed)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Sequential,
    /// Replicas spread over the rayon pool. Without the `parallel` feature
    /// this runs sequentially.
    #[default]
    Parallel,
}

/// Runs replicas `0..replicas`, replica `i` with seed
/// `derive_seed(master_seed, i)`. Output order is replica order whatever
/// the execution mode.
pub fn run_experiment<E: Experiment>(
    exp: &E,
    replicas: u64,
    master_seed: u64,
    exec: Execution,
) -> Result<Vec<E::Output>> {
    if replicas == 0 {
        return Err(Error::invalid("replicas", "must be at least 1"));
    }
    let one = |i: u64| exp.run(i, derive_seed(master_seed, i));
    match exec {
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            (0..replicas).into_par_iter().map(one).collect()
        }
        _ => (0..replicas).map(one).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prefix_and_modes_agree() {
        let exp = |i: u64, seed: u64| Ok((i, seed));
        let small = run_experiment(&exp, 100, 5, Execution::Sequential).unwrap();
        let big = run_experiment(&exp, 200, 5, Execution::Parallel).unwrap();
        assert_eq!(small[..], big[..100]);
        assert!(run_experiment(&exp, 0, 5, Execution::Sequential).is_err());
    }
}
