//! Mesh points: layered nets over the upper-level sets of a contour ladder.
//!
//! Layer 0 is exactly the center `{x0}`. For each deeper rung `k >= 1` a
//! greedy `eta`-separated net is extracted from the sampled upper set
//! `X_{s_k}`; every net point is then assigned to the layer of the entropy
//! band it falls in (`layer i` holds points with `s_i <= mu < s_{i-1}`), and
//! duplicates across rungs collapse. The defining property, audited on the
//! sampling grid before the set is returned, is that the union of layers
//! `0..=k` is `2 eta`-dense in the sampled `X_{s_{k+1}}` for every rung.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::thermo::ladder::{domain_sample, ContourLadder};
use crate::thermo::EntropyProfile;

/// Mesh points organized by entropy layer.
#[derive(Clone, Debug)]
pub struct MeshPointSet {
    /// Net separation parameter.
    pub eta: f64,
    /// Grid spacing the nets were extracted at.
    pub resolution: f64,
    /// `layers[i]` holds the mesh points of entropy band `i`; `layers[0]`
    /// is exactly the ladder center.
    pub layers: Vec<Vec<Vec<f64>>>,
}

impl MeshPointSet {
    pub fn total_points(&self) -> usize {
        self.layers.iter().map(|l| l.len()).sum()
    }

    /// Flattened `(layer, point)` view in deterministic order.
    pub fn labeled_points(&self) -> Vec<(usize, &[f64])> {
        let mut out = Vec::with_capacity(self.total_points());
        for (i, layer) in self.layers.iter().enumerate() {
            for p in layer {
                out.push((i, p.as_slice()));
            }
        }
        out
    }
}

fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Extracts layered mesh points for a ladder.
///
/// Preconditions: `eta > 0`; the ladder's per-rung growth `epsilon` must
/// not exceed `eta` (otherwise level sets can outgrow the net); and the
/// extraction grid spacing `resolution` must be at most `eta / sqrt(m)`
/// (the default `eta / (2 sqrt(m))` leaves audit headroom). If the audit
/// finds a sampled point of some `X_{s_{k+1}}` farther than `2 eta` from
/// every mesh point of layers `0..=k`, the extraction fails with
/// [`Error::MeshTooCoarse`] instead of returning an unusable net.
pub fn mesh_points(
    profile: &EntropyProfile,
    ladder: &ContourLadder,
    eta: f64,
    resolution: Option<f64>,
) -> Result<MeshPointSet> {
    if !(eta.is_finite() && eta > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "eta must be a positive finite number, got {eta}"
        )));
    }
    if ladder.epsilon > eta {
        return Err(Error::InvalidParameter(format!(
            "ladder growth epsilon {} exceeds eta {eta}: upper sets can step \
             farther than the net covers",
            ladder.epsilon
        )));
    }
    let m = profile.m();
    let limit = eta / (m as f64).sqrt();
    let resolution = resolution.unwrap_or(0.5 * limit);
    if !(resolution.is_finite() && resolution > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "resolution must be a positive finite number, got {resolution}"
        )));
    }
    if resolution > limit {
        return Err(Error::InvalidParameter(format!(
            "resolution {resolution} exceeds eta/sqrt(m) = {limit}; the grid \
             cannot resolve an eta-net"
        )));
    }
    let sample = domain_sample(profile, resolution)?;

    // Greedy eta-net per rung, on the sampled upper sets, in grid order.
    // Key net points by their sample index for cross-rung deduplication.
    let levels = &ladder.levels;
    let mut assigned: BTreeMap<usize, usize> = BTreeMap::new(); // sample idx -> layer
    for k in 1..levels.len() {
        let upper = sample.upper_set(levels[k]);
        let mut kept: Vec<usize> = Vec::new();
        for &i in &upper {
            let p = &sample.points()[i];
            let close_to_kept = kept
                .iter()
                .any(|&j| squared_distance(p, &sample.points()[j]) < eta * eta);
            let close_to_center = squared_distance(p, &ladder.x0) < eta * eta;
            if !close_to_kept && !close_to_center {
                kept.push(i);
            }
        }
        for i in kept {
            let mu = sample.mu_values()[i];
            // Entropy band: the unique layer with s_layer <= mu < s_{layer-1}.
            let layer = match levels.iter().position(|&s| mu >= s) {
                Some(0) => 1, // at the peak within solver noise: first band
                Some(pos) => pos,
                None => continue, // below the final level: outside every band
            };
            assigned
                .entry(i)
                .and_modify(|l| *l = (*l).min(layer))
                .or_insert(layer);
        }
    }

    let mut layers: Vec<Vec<Vec<f64>>> = vec![Vec::new(); levels.len()];
    layers[0].push(ladder.x0.clone());
    for (&i, &layer) in &assigned {
        layers[layer].push(sample.points()[i].clone());
    }

    // Density audit: layers 0..=k must be 2 eta-dense in sampled X_{s_{k+1}}.
    let mut prefix: Vec<Vec<f64>> = vec![ladder.x0.clone()];
    for k in 0..levels.len() - 1 {
        for p in &layers[k] {
            if k > 0 {
                prefix.push(p.clone());
            }
        }
        let target = sample.upper_set(levels[k + 1]);
        let mut worst = 0.0_f64;
        for &i in &target {
            let p = &sample.points()[i];
            let nearest = prefix
                .iter()
                .map(|q| squared_distance(p, q))
                .fold(f64::INFINITY, f64::min)
                .sqrt();
            worst = worst.max(nearest);
        }
        if worst > 2.0 * eta + 1e-12 {
            return Err(Error::MeshTooCoarse {
                resolution,
                gap: worst,
                limit: 2.0 * eta,
            });
        }
    }

    Ok(MeshPointSet {
        eta,
        resolution,
        layers,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{pauli_x, pauli_z};
    use crate::macro_obs::ObservableFamily;
    use crate::thermo::ladder::contour_ladder;

    fn zx_profile() -> EntropyProfile {
        EntropyProfile::new(ObservableFamily::new(2, vec![pauli_z(), pauli_x()]).unwrap())
    }

    fn build(epsilon: f64) -> (EntropyProfile, ContourLadder) {
        let profile = zx_profile();
        let sample = domain_sample(&profile, 0.1).unwrap();
        let ladder = contour_ladder(&profile, &sample, epsilon).unwrap();
        (profile, ladder)
    }

    #[test]
    fn layer_zero_is_exactly_the_center() {
        let (profile, ladder) = build(0.2);
        let mesh = mesh_points(&profile, &ladder, 0.25, None).unwrap();
        assert_eq!(mesh.layers[0], vec![vec![0.0, 0.0]]);
    }

    #[test]
    fn net_points_are_eta_separated_within_a_layer_union() {
        let (profile, ladder) = build(0.2);
        let eta = 0.25;
        let mesh = mesh_points(&profile, &ladder, eta, None).unwrap();
        let pts: Vec<&[f64]> = mesh.labeled_points().iter().map(|&(_, p)| p).collect();
        assert!(
            pts.len() > 3,
            "unexpectedly tiny mesh: {} points",
            pts.len()
        );
        // Points sharing a rung's net are eta-separated; across rungs the
        // guarantee is deduplication, so check pairwise distinctness only.
        for (a, pa) in pts.iter().enumerate() {
            for pb in pts.iter().skip(a + 1) {
                assert!(
                    squared_distance(pa, pb) > 1e-24,
                    "duplicate mesh point {pa:?}"
                );
            }
        }
    }

    #[test]
    fn rejects_epsilon_larger_than_eta() {
        let (profile, ladder) = build(0.3);
        let err = mesh_points(&profile, &ladder, 0.25, None).unwrap_err();
        assert!(matches!(err, Error::InvalidParameter(_)), "got {err:?}");
    }

    #[test]
    fn rejects_too_coarse_resolution() {
        let (profile, ladder) = build(0.2);
        // eta/sqrt(2) ~ 0.177; ask for 0.3.
        let err = mesh_points(&profile, &ladder, 0.25, Some(0.3)).unwrap_err();
        assert!(matches!(err, Error::InvalidParameter(_)), "got {err:?}");
    }

    #[test]
    fn default_resolution_passes_density_audit() {
        let (profile, ladder) = build(0.25);
        let mesh = mesh_points(&profile, &ladder, 0.3, None).unwrap();
        assert!(mesh.total_points() >= 4);
        assert_eq!(mesh.layers.len(), ladder.levels.len());
    }
}
