//! Contour ladders: decreasing entropy levels whose upper-level sets grow by
//! at most `epsilon` per rung, certified empirically on a sampling grid.
//!
//! The upper-level sets `X_s = {x : mu(x) >= s}` shrink to the maximally
//! mixed mean point `x0` as `s` rises to `mu(x0) = log d`, and grow to the
//! whole domain as `s` falls to its minimum. A ladder
//! `s_0 > s_1 > ... > s_K` is chosen so that each `X_{s_{k+1}}` lies inside
//! the `epsilon`-neighborhood of `X_{s_k}`: the top rung `s_1` is found by
//! binary search (deepest tested level whose upper set stays within
//! `epsilon` of `x0`), and the remaining rungs follow the geometric schedule
//! `s_k = s_0 - (C/(C-epsilon))^{k-1} (s_0 - s_1)` with
//! `C = 1.1 * max(domain bounding-box diameter, epsilon)`, stopping at the
//! first level below zero. The geometric factor is the empirical growth
//! budget: concavity of `mu` makes level-set radii grow at most linearly in
//! the entropy drop, and `C` caps the radius scale.

use crate::error::{Error, Result};
use crate::thermo::{norm2, EntropyProfile};

/// Hard cap on ladder length; hitting it means the schedule degenerated.
const MAX_LEVELS: usize = 20_000;

/// A cached grid of entropy evaluations over the achievable-means bounding
/// box. Points outside the domain carry `mu = NEG_INFINITY`.
#[derive(Clone, Debug)]
pub struct DomainSample {
    points: Vec<Vec<f64>>,
    mu: Vec<f64>,
    step: f64,
    bbox_lo: Vec<f64>,
    bbox_hi: Vec<f64>,
}

impl DomainSample {
    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn mu_values(&self) -> &[f64] {
        &self.mu
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    /// Bounding box of the sampled points with finite entropy:
    /// `(lo, hi)` per coordinate, or `None` when nothing was finite.
    pub fn finite_bbox(&self) -> Option<(Vec<f64>, Vec<f64>)> {
        if self.mu.iter().all(|v| !v.is_finite()) {
            return None;
        }
        Some((self.bbox_lo.clone(), self.bbox_hi.clone()))
    }

    /// Euclidean diameter of the finite-entropy bounding box.
    pub fn finite_bbox_diameter(&self) -> f64 {
        match self.finite_bbox() {
            Some((lo, hi)) => norm2(&lo.iter().zip(&hi).map(|(a, b)| b - a).collect::<Vec<f64>>()),
            None => 0.0,
        }
    }

    /// Indices of sampled points with `mu >= level`.
    pub fn upper_set(&self, level: f64) -> Vec<usize> {
        (0..self.points.len())
            .filter(|&i| self.mu[i] >= level)
            .collect()
    }

    /// Minimum finite sampled entropy (0.0 when nothing is finite).
    pub fn min_finite_mu(&self) -> f64 {
        let min = self
            .mu
            .iter()
            .copied()
            .filter(|v| v.is_finite())
            .fold(f64::INFINITY, f64::min);
        if min.is_finite() {
            min
        } else {
            0.0
        }
    }
}

/// Probes `mu` on a regular grid covering the product of generator spectral
/// ranges (which contains every achievable mean). `step` is the requested
/// grid spacing; each axis is subdivided evenly with spacing at most `step`
/// and both endpoints included.
pub fn domain_sample(profile: &EntropyProfile, step: f64) -> Result<DomainSample> {
    if !(step.is_finite() && step > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "grid step must be a positive finite number, got {step}"
        )));
    }
    let family = profile.family();
    let m = family.m();
    let mut axes: Vec<Vec<f64>> = Vec::with_capacity(m);
    let mut total: usize = 1;
    for g in family.generators() {
        let spectrum = crate::algebra::hermitian_eig(g)?;
        let lo = *spectrum.eigenvalues().first().unwrap();
        let hi = *spectrum.eigenvalues().last().unwrap();
        let span = hi - lo;
        let cells = if span <= 0.0 {
            0
        } else {
            (span / step).ceil() as usize
        };
        let axis: Vec<f64> = if cells == 0 {
            vec![lo]
        } else {
            (0..=cells)
                .map(|i| lo + span * (i as f64) / (cells as f64))
                .collect()
        };
        total = total.saturating_mul(axis.len());
        axes.push(axis);
    }
    const MAX_GRID_POINTS: usize = 2_000_000;
    if total > MAX_GRID_POINTS {
        return Err(Error::InvalidParameter(format!(
            "grid step {step} yields {total} sample points (cap {MAX_GRID_POINTS}); \
             coarsen the step or reduce the number of generators"
        )));
    }
    let mut points = Vec::with_capacity(total);
    let mut mu = Vec::with_capacity(total);
    let mut index = vec![0usize; m];
    let mut bbox_lo = vec![f64::INFINITY; m];
    let mut bbox_hi = vec![f64::NEG_INFINITY; m];
    loop {
        let point: Vec<f64> = index.iter().enumerate().map(|(i, &k)| axes[i][k]).collect();
        let eval = profile.mu(&point)?;
        if eval.value.is_finite() {
            for i in 0..m {
                bbox_lo[i] = bbox_lo[i].min(point[i]);
                bbox_hi[i] = bbox_hi[i].max(point[i]);
            }
        }
        points.push(point);
        mu.push(eval.value);
        // Odometer increment over the mixed-radix index.
        let mut axis = 0;
        loop {
            if axis == m {
                return Ok(DomainSample {
                    points,
                    mu,
                    step,
                    bbox_lo,
                    bbox_hi,
                });
            }
            index[axis] += 1;
            if index[axis] < axes[axis].len() {
                break;
            }
            index[axis] = 0;
            axis += 1;
        }
    }
}

/// A contour ladder: levels, growth constants, and the center it contracts
/// to.
#[derive(Clone, Debug)]
pub struct ContourLadder {
    /// Maximally mixed mean point (entropy maximizer).
    pub x0: Vec<f64>,
    /// Strictly decreasing levels `s_0 > s_1 > ...`; the last is the first
    /// one below zero.
    pub levels: Vec<f64>,
    /// Per-rung growth budget.
    pub epsilon: f64,
    /// Radius-scale constant `C = 1.1 * max(bbox diameter, epsilon)`.
    pub c: f64,
}

impl ContourLadder {
    pub fn num_levels(&self) -> usize {
        self.levels.len()
    }

    /// Geometric ratio `C / (C - epsilon)` between successive level drops.
    pub fn ratio(&self) -> f64 {
        self.c / (self.c - self.epsilon)
    }
}

/// Builds a contour ladder for the profile from a precomputed domain sample.
///
/// `epsilon` must be positive and strictly below the constant
/// `C = 1.1 * max(sampled-domain bounding-box diameter, epsilon)`; since
/// `C >= 1.1 * epsilon` this only fails on non-finite input.
pub fn contour_ladder(
    profile: &EntropyProfile,
    sample: &DomainSample,
    epsilon: f64,
) -> Result<ContourLadder> {
    if !(epsilon.is_finite() && epsilon > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "epsilon must be a positive finite number, got {epsilon}"
        )));
    }
    let x0 = profile.family().center_point();
    let top = profile.mu(&x0)?;
    let s0 = top.value;
    if !s0.is_finite() {
        return Err(Error::Inconclusive(format!(
            "entropy at the center point evaluated to {s0}"
        )));
    }
    let diameter = sample.finite_bbox_diameter();
    let c = 1.1 * diameter.max(epsilon);
    if epsilon >= c {
        return Err(Error::EpsilonVsC { epsilon, c });
    }

    // Binary search for s_1: the deepest tested level whose sampled upper
    // set stays within epsilon of x0. Levels close enough to s0 always
    // qualify (the sampled upper set near the peak is empty or hugs x0), so
    // the search brackets [lo, s0).
    let min_mu = sample
        .mu_values()
        .iter()
        .copied()
        .filter(|v| v.is_finite())
        .fold(s0, f64::min);
    let delta = 0.2 * (s0 - min_mu);
    if !(delta.is_finite() && delta > 0.0) {
        return Err(Error::Inconclusive(
            "sampled entropy range is degenerate: no level spread to search for s_1".into(),
        ));
    }
    let contained = |level: f64| -> bool {
        sample.upper_set(level).iter().all(|&i| {
            let p = &sample.points()[i];
            let d: Vec<f64> = p.iter().zip(&x0).map(|(a, b)| a - b).collect();
            norm2(&d) <= epsilon
        })
    };
    let mut lo = s0 - delta;
    let mut hi = s0;
    let mut best: Option<f64> = None;
    if contained(lo) {
        best = Some(lo);
    } else {
        for _ in 0..30 {
            let mid = 0.5 * (lo + hi);
            if contained(mid) {
                best = Some(mid);
                hi = mid;
            } else {
                lo = mid;
            }
        }
    }
    let s1 = best.ok_or_else(|| {
        Error::Inconclusive(
            "binary search found no level whose upper set stays within epsilon of the center"
                .into(),
        )
    })?;

    let ratio = c / (c - epsilon);
    let base_drop = s0 - s1;
    let mut levels = vec![s0, s1];
    let mut k = 2usize;
    loop {
        if levels.len() > MAX_LEVELS {
            return Err(Error::Inconclusive(format!(
                "ladder exceeded {MAX_LEVELS} levels before crossing zero \
                 (epsilon {epsilon}, C {c})"
            )));
        }
        let s_k = s0 - ratio.powi((k - 1) as i32) * base_drop;
        levels.push(s_k);
        if s_k < 0.0 {
            break;
        }
        k += 1;
    }
    Ok(ContourLadder {
        x0,
        levels,
        epsilon,
        c,
    })
}

/// One rung of the empirical inclusion audit.
#[derive(Clone, Debug)]
pub struct InclusionAuditRow {
    /// Audited inclusion: sampled `X_{s_k}` against the epsilon-fattened
    /// sampled `X_{s_{k-1}}`.
    pub k: usize,
    pub holds: bool,
    /// Largest distance from a point of the deeper set to the shallower set.
    pub worst_distance: f64,
    pub points_checked: usize,
}

/// Audits, on the sampled grid, that each upper-level set of the ladder is
/// contained in the `epsilon`-neighborhood of the previous one. The center
/// `x0` always belongs to every upper set and is included as a candidate
/// even when it is not a grid point.
pub fn audit_inclusions(ladder: &ContourLadder, sample: &DomainSample) -> Vec<InclusionAuditRow> {
    let mut rows = Vec::new();
    for k in 1..ladder.levels.len() {
        let deeper = sample.upper_set(ladder.levels[k]);
        let shallower = sample.upper_set(ladder.levels[k - 1]);
        let mut worst = 0.0_f64;
        for &i in &deeper {
            let p = &sample.points()[i];
            let mut nearest = {
                let d: Vec<f64> = p.iter().zip(&ladder.x0).map(|(a, b)| a - b).collect();
                norm2(&d)
            };
            for &j in &shallower {
                let q = &sample.points()[j];
                let d: Vec<f64> = p.iter().zip(q).map(|(a, b)| a - b).collect();
                nearest = nearest.min(norm2(&d));
                if nearest == 0.0 {
                    break;
                }
            }
            worst = worst.max(nearest);
        }
        rows.push(InclusionAuditRow {
            k,
            holds: worst <= ladder.epsilon + 1e-12,
            worst_distance: worst,
            points_checked: deeper.len(),
        });
    }
    rows
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{pauli_x, pauli_z};
    use crate::macro_obs::ObservableFamily;

    fn zx_profile() -> EntropyProfile {
        EntropyProfile::new(ObservableFamily::new(2, vec![pauli_z(), pauli_x()]).unwrap())
    }

    #[test]
    fn schedule_matches_closed_form() {
        // With s0 = log 2, s0 - s1 = 0.1, C = 2, epsilon = 0.5 the third
        // level is s0 - (2/1.5) * 0.1.
        let s0 = 2.0_f64.ln();
        let ladder = ContourLadder {
            x0: vec![0.0],
            levels: vec![s0, s0 - 0.1, s0 - (2.0 / 1.5) * 0.1],
            epsilon: 0.5,
            c: 2.0,
        };
        let expected = 0.559_814;
        assert!(
            (ladder.levels[2] - expected).abs() < 5e-7,
            "got {}",
            ladder.levels[2]
        );
        assert!((ladder.ratio() - 2.0 / 1.5).abs() < 1e-15);
    }

    #[test]
    fn ladder_levels_strictly_decrease_and_end_below_zero() {
        let profile = zx_profile();
        let sample = domain_sample(&profile, 0.1).unwrap();
        let ladder = contour_ladder(&profile, &sample, 0.3).unwrap();
        assert!(ladder.levels.len() >= 3);
        for w in ladder.levels.windows(2) {
            assert!(w[1] < w[0], "levels not strictly decreasing: {w:?}");
        }
        assert!(*ladder.levels.last().unwrap() < 0.0);
        assert!(ladder.levels[ladder.levels.len() - 2] >= 0.0);
        // s0 is the peak entropy log 2.
        assert!((ladder.levels[0] - 2.0_f64.ln()).abs() < 1e-8);
    }

    #[test]
    fn bloch_disk_bbox_has_diameter_two_sqrt_two() {
        // Finite-entropy points of (sigma_z, sigma_x) fill the unit disk, so
        // the bounding box is [-1,1]^2 up to one grid step.
        let profile = zx_profile();
        let sample = domain_sample(&profile, 0.1).unwrap();
        let diam = sample.finite_bbox_diameter();
        assert!((diam - 2.0 * 2.0_f64.sqrt()).abs() < 0.3, "diameter {diam}");
    }

    #[test]
    fn audit_holds_on_bloch_disk() {
        let profile = zx_profile();
        let sample = domain_sample(&profile, 0.1).unwrap();
        let ladder = contour_ladder(&profile, &sample, 0.3).unwrap();
        let rows = audit_inclusions(&ladder, &sample);
        assert_eq!(rows.len(), ladder.levels.len() - 1);
        for row in &rows {
            assert!(
                row.holds,
                "rung {} broke the inclusion: worst distance {}",
                row.k, row.worst_distance
            );
        }
    }

    #[test]
    fn rejects_bad_epsilon() {
        let profile = zx_profile();
        let sample = domain_sample(&profile, 0.2).unwrap();
        assert!(contour_ladder(&profile, &sample, 0.0).is_err());
        assert!(contour_ladder(&profile, &sample, f64::NAN).is_err());
    }
}
