//! Kleinberg hub/authority iteration.

use crate::error::{Error, Result};
use crate::format::sig;
use crate::webgraph::GraphView;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HitsOptions {
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for HitsOptions {
    fn default() -> Self {
        HitsOptions {
            tolerance: 1e-9,
            max_iterations: 1000,
        }
    }
}

/// Hub and authority vectors, indexed by node of the underlying graph.
/// Excluded nodes carry zeros.
#[derive(Clone, Debug, PartialEq)]
pub struct HitsScores {
    pub hub: Vec<f64>,
    pub auth: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

impl HitsScores {
    /// `page_id<TAB>hub<TAB>auth` lines, 9 significant digits. `label` maps
    /// node indices to the ids written out.
    pub fn to_text(&self, label: impl Fn(usize) -> String) -> String {
        let mut out = String::new();
        for (i, (h, a)) in self.hub.iter().zip(&self.auth).enumerate() {
            out.push_str(&format!("{}\t{}\t{}\n", label(i), sig(*h, 9), sig(*a, 9)));
        }
        out
    }
}

/// Runs HITS with L2 normalization after each half-step, starting from
/// all-ones vectors. Stops once neither vector moves by `tolerance` or more
/// in max-norm, or after `max_iterations` sweeps.
pub fn compute_hits(view: &GraphView<'_>, tolerance: f64, max_iterations: usize) -> Result<HitsScores> {
    compute_hits_observed(view, tolerance, max_iterations, |_, _, _| {})
}

/// As [`compute_hits`], calling `observe(sweep, hub, auth)` after every sweep.
pub fn compute_hits_observed<F>(
    view: &GraphView<'_>,
    tolerance: f64,
    max_iterations: usize,
    mut observe: F,
) -> Result<HitsScores>
where
    F: FnMut(usize, &[f64], &[f64]),
{
    if tolerance.is_nan() || tolerance <= 0.0 {
        return Err(Error::invalid("tolerance must be positive"));
    }
    if max_iterations == 0 {
        return Err(Error::invalid("max_iterations must be at least 1"));
    }
    let n = view.node_count();
    let active: Vec<bool> = (0..n).map(|x| view.is_active(x)).collect();
    if !active.iter().any(|&a| a) {
        return Err(Error::invalid("HITS on an empty graph"));
    }

    let mut hub: Vec<f64> = active.iter().map(|&a| if a { 1.0 } else { 0.0 }).collect();
    let mut auth = hub.clone();
    normalize(&mut hub);
    normalize(&mut auth);

    for iteration in 1..=max_iterations {
        let (new_hub, new_auth) = sweep(view, &hub);
        if new_auth.iter().all(|&a| a == 0.0) {
            // no active edges
            let zeros = vec![0.0; n];
            observe(iteration, &zeros, &zeros);
            return Ok(HitsScores {
                hub: zeros.clone(),
                auth: zeros,
                iterations: iteration,
                converged: true,
            });
        }
        let delta = max_abs_diff(&hub, &new_hub).max(max_abs_diff(&auth, &new_auth));
        hub = new_hub;
        auth = new_auth;
        observe(iteration, &hub, &auth);
        if delta < tolerance {
            return Ok(HitsScores {
                hub,
                auth,
                iterations: iteration,
                converged: true,
            });
        }
    }
    Ok(HitsScores {
        hub,
        auth,
        iterations: max_iterations,
        converged: false,
    })
}

/// One update: `auth(x) = Σ hub(y)` over `y → x`, normalized, then
/// `hub(x) = Σ auth(y)` over `x → y`, normalized.
pub fn sweep(view: &GraphView<'_>, hub: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let n = view.node_count();
    let mut auth = vec![0.0; n];
    for (x, a) in auth.iter_mut().enumerate() {
        if view.is_active(x) {
            *a = view.predecessors_of(x).fold(0.0, |acc, y| acc + hub[y]);
        }
    }
    normalize(&mut auth);
    let mut new_hub = vec![0.0; n];
    for (x, h) in new_hub.iter_mut().enumerate() {
        if view.is_active(x) {
            *h = view.successors_of(x).fold(0.0, |acc, y| acc + auth[y]);
        }
    }
    normalize(&mut new_hub);
    (new_hub, auth)
}

fn normalize(v: &mut [f64]) {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        v.iter_mut().for_each(|x| *x /= norm);
    }
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}
