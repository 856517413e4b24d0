//! Generic RANSAC driver shared by rigid alignment and plane fitting.

use rand::seq::index::sample;
use rand::Rng;

pub trait RansacModel: Sized {
    type Datum;
    /// Points per minimal hypothesis.
    const SAMPLE_SIZE: usize;

    /// Fits a hypothesis to `sample` (indices into `data`); `None` when the
    /// sample is degenerate.
    fn fit(data: &[Self::Datum], sample: &[usize]) -> Option<Self>;

    fn residual(&self, datum: &Self::Datum) -> f64;
}

#[derive(Debug, Clone)]
pub struct Consensus<M> {
    pub model: M,
    /// Indices (into `data`) of the inliers, ascending.
    pub inliers: Vec<usize>,
}

/// Best minimal-sample hypothesis over `pool` by inlier count under
/// `residual < threshold`. Ties keep the earlier hypothesis. Deterministic
/// for a given RNG state.
pub fn ransac<M: RansacModel>(
    data: &[M::Datum],
    pool: &[usize],
    iterations: usize,
    threshold: f64,
    rng: &mut impl Rng,
) -> Option<Consensus<M>> {
    if pool.len() < M::SAMPLE_SIZE {
        return None;
    }
    let mut best: Option<Consensus<M>> = None;
    let mut chosen = vec![0usize; M::SAMPLE_SIZE];
    for _ in 0..iterations {
        for (slot, k) in chosen
            .iter_mut()
            .zip(sample(rng, pool.len(), M::SAMPLE_SIZE))
        {
            *slot = pool[k];
        }
        let Some(model) = M::fit(data, &chosen) else {
            continue;
        };
        let inliers: Vec<usize> = pool
            .iter()
            .copied()
            .filter(|&i| model.residual(&data[i]) < threshold)
            .collect();
        if best
            .as_ref()
            .is_none_or(|b| inliers.len() > b.inliers.len())
        {
            best = Some(Consensus { model, inliers });
        }
    }
    best
}
