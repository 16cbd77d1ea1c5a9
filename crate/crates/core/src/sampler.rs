//! Random rooted networks given by exact ball samplers.

use std::sync::Arc;

use crate::error::Result;
use crate::network::RootedNetwork;
use crate::rng::SimRng;

/// A law on rooted networks, accessed through exact balls.
///
/// `sample(r, rng)` returns a network whose validity is at least `r`; the law
/// of its `r`-ball is the law of the `r`-ball of the target measure. Asking for
/// a larger radius and cutting the result down must not change that law.
pub trait RootedLawSampler: Send + Sync {
    fn name(&self) -> String;

    fn sample(&self, radius: u32, rng: &mut SimRng) -> Result<RootedNetwork>;

    /// Upper bound on all vertex degrees, when the law declares one.
    fn degree_bound(&self) -> Option<usize> {
        None
    }

    /// Exact law of the root degree (`law[k] = P[deg o = k]`), when known in
    /// closed form.
    fn root_degree_law(&self) -> Option<Vec<f64>> {
        None
    }
}

pub type SharedSampler = Arc<dyn RootedLawSampler>;

impl<S: RootedLawSampler + ?Sized> RootedLawSampler for Arc<S> {
    fn name(&self) -> String {
        (**self).name()
    }

    fn sample(&self, radius: u32, rng: &mut SimRng) -> Result<RootedNetwork> {
        (**self).sample(radius, rng)
    }

    fn degree_bound(&self) -> Option<usize> {
        (**self).degree_bound()
    }

    fn root_degree_law(&self) -> Option<Vec<f64>> {
        (**self).root_degree_law()
    }
}
