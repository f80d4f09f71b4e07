//! Rank diagnostics for mean observables: spectral box projections, rank
//! rates against the entropy envelope, and the minimal-rank entropy
//! `beta_{eps,n}` of product states.
//!
//! The guiding quantity is `log(rank)/(2n+1)` for the projection onto the
//! part of the joint mean spectrum near a point `x`: as the window grows it
//! is squeezed by the entropy function — from above by `sup mu` over the
//! closed box (plus a vanishing finite-size slack), from below by `sup mu`
//! over the open box. `beta_{eps,n}` plays the same game for product
//! states: the log-rank of the smallest projection capturing mass `1-eps`,
//! whose rate converges to the one-site von Neumann entropy.

use crate::algebra::{apply_function_to, hermitian_eig, HermitianOperator};
use crate::error::{Error, Result};
use crate::macro_obs::{MeanObservableSet, ObservableFamily};
use crate::thermo::EntropyProfile;
use crate::tol::BOX_BOUNDARY;

/// Boundary convention for a box in mean-value space.
///
/// Closed boxes include eigenvalues within [`BOX_BOUNDARY`] of the boundary;
/// open boxes exclude them. Upper-bound rank audits use closed boxes, lower
/// bound audits use open ones.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BoxKind {
    Closed,
    Open,
}

/// An axis-aligned cube `prod_i [x_i - eps, x_i + eps]` around a center.
#[derive(Clone, Debug)]
pub struct BoxSpec {
    pub center: Vec<f64>,
    pub halfwidth: f64,
    pub kind: BoxKind,
}

impl BoxSpec {
    pub fn new(center: Vec<f64>, halfwidth: f64, kind: BoxKind) -> Result<Self> {
        if center.is_empty() || center.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "box center must be non-empty and finite, got {center:?}"
            )));
        }
        if !(halfwidth.is_finite() && halfwidth > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "box halfwidth must be a positive finite number, got {halfwidth}"
            )));
        }
        Ok(Self {
            center,
            halfwidth,
            kind,
        })
    }

    pub fn closed(center: Vec<f64>, halfwidth: f64) -> Result<Self> {
        Self::new(center, halfwidth, BoxKind::Closed)
    }

    pub fn open(center: Vec<f64>, halfwidth: f64) -> Result<Self> {
        Self::new(center, halfwidth, BoxKind::Open)
    }

    pub fn m(&self) -> usize {
        self.center.len()
    }

    /// Membership with the boundary tolerance of the box kind.
    pub fn contains(&self, point: &[f64]) -> bool {
        debug_assert_eq!(point.len(), self.center.len());
        self.center.iter().zip(point).all(|(&c, &p)| {
            let offset = (p - c).abs();
            match self.kind {
                BoxKind::Closed => offset <= self.halfwidth + BOX_BOUNDARY,
                BoxKind::Open => offset < self.halfwidth - BOX_BOUNDARY,
            }
        })
    }
}

/// A spectral (or model-cell) projection together with its rank.
#[derive(Clone, Debug)]
pub struct BoxProjection {
    pub operator: HermitianOperator,
    pub rank: usize,
}

/// Read access to the cells of a commuting joint model, as needed by joint
/// box projections. Implemented by the clustering module's model type; kept
/// as a trait here so rank diagnostics do not depend on how the model is
/// built.
pub trait JointCellSource {
    /// Number of observables the model covers.
    fn m(&self) -> usize;
    /// Hilbert-space dimension.
    fn dim(&self) -> usize;
    fn num_cells(&self) -> usize;
    /// Joint cell center `zeta_j` in mean-value space.
    fn cell_center(&self, j: usize) -> &[f64];
    fn cell_rank(&self, j: usize) -> usize;
    /// Orthogonal projection onto the span of the selected cells.
    fn projection_onto(&self, selected: &[usize]) -> HermitianOperator;
}

/// Projection onto the part of the joint mean spectrum inside a box.
///
/// For a single observable this is the exact spectral projection of `H_1`
/// onto the interval; for `m >= 2` joint spectra are defined only through a
/// commuting model, so `model` is required and the result sums the model
/// cells whose centers lie in the box. An empty box yields the explicit
/// rank-0 projection.
pub fn box_projection(
    means: &MeanObservableSet,
    spec: &BoxSpec,
    model: Option<&dyn JointCellSource>,
) -> Result<BoxProjection> {
    let m = means.m();
    if spec.m() != m {
        return Err(Error::DimensionMismatch {
            left: spec.m(),
            right: m,
        });
    }
    if m == 1 {
        let h = &means.operators()[0];
        let dec = hermitian_eig(h)?;
        let rank = dec
            .eigenvalues()
            .iter()
            .filter(|&&lambda| spec.contains(&[lambda]))
            .count();
        let operator = if rank == 0 {
            HermitianOperator::zero(h.dim())?
        } else {
            apply_function_to(
                &dec,
                |lambda| {
                    if spec.contains(&[lambda]) {
                        1.0
                    } else {
                        0.0
                    }
                },
            )?
        };
        return Ok(BoxProjection { operator, rank });
    }
    let model = model.ok_or(Error::ModelRequired)?;
    if model.m() != m {
        return Err(Error::DimensionMismatch {
            left: model.m(),
            right: m,
        });
    }
    if model.dim() != means.dim() {
        return Err(Error::DimensionMismatch {
            left: model.dim(),
            right: means.dim(),
        });
    }
    let selected: Vec<usize> = (0..model.num_cells())
        .filter(|&j| spec.contains(model.cell_center(j)))
        .collect();
    let rank: usize = selected.iter().map(|&j| model.cell_rank(j)).sum();
    let operator = if rank == 0 {
        HermitianOperator::zero(model.dim())?
    } else {
        model.projection_onto(&selected)
    };
    Ok(BoxProjection { operator, rank })
}

/// One row of a rank-rate experiment.
#[derive(Clone, Debug)]
pub struct RankRateRecord {
    pub n: u32,
    pub rank: usize,
    /// `log(rank) / (2n+1)`; `NEG_INFINITY` when the rank is 0.
    pub rate: f64,
    /// `sup` of the entropy over the closed box, by grid maximization.
    pub target_sup_mu: f64,
    pub center: Vec<f64>,
    pub halfwidth: f64,
    pub kind: BoxKind,
}

impl RankRateRecord {
    /// Finite-size slack `2/(2n+1)` used by the upper-bound audit: one-site
    /// perturbations move means by `O(1/n)`.
    pub fn slack(&self) -> f64 {
        2.0 / (2.0 * self.n as f64 + 1.0)
    }

    /// `target_sup_mu - rate`; positive when the rate is below the envelope.
    pub fn deficit(&self) -> f64 {
        self.target_sup_mu - self.rate
    }
}

/// Maximizes the entropy over the closed box on a regular grid (33 points
/// per axis), returning `NEG_INFINITY` when the box misses the domain.
pub fn sup_mu_over_box(profile: &EntropyProfile, spec: &BoxSpec) -> Result<f64> {
    const POINTS_PER_AXIS: usize = 33;
    let m = spec.m();
    if profile.m() != m {
        return Err(Error::DimensionMismatch {
            left: profile.m(),
            right: m,
        });
    }
    let axis: Vec<f64> = (0..POINTS_PER_AXIS)
        .map(|i| -1.0 + 2.0 * (i as f64) / ((POINTS_PER_AXIS - 1) as f64))
        .collect();
    let mut best = f64::NEG_INFINITY;
    let mut index = vec![0usize; m];
    loop {
        let point: Vec<f64> = index
            .iter()
            .enumerate()
            .map(|(i, &k)| spec.center[i] + spec.halfwidth * axis[k])
            .collect();
        let value = profile.mu(&point)?.value;
        if value > best {
            best = value;
        }
        let mut i = 0;
        loop {
            if i == m {
                return Ok(best);
            }
            index[i] += 1;
            if index[i] < POINTS_PER_AXIS {
                break;
            }
            index[i] = 0;
            i += 1;
        }
    }
}

/// Computes rank-rate records for a family across window sizes.
///
/// For `m >= 2` the `model_supplier` must produce a commuting model for each
/// requested window. `max_dim` caps the dense window dimension.
pub fn rank_rate(
    family: &ObservableFamily,
    spec: &BoxSpec,
    n_values: &[u32],
    mut model_supplier: Option<&mut dyn FnMut(u32) -> Result<Box<dyn JointCellSource>>>,
    max_dim: usize,
) -> Result<Vec<RankRateRecord>> {
    let profile = EntropyProfile::new(family.clone());
    let closed_box = BoxSpec {
        center: spec.center.clone(),
        halfwidth: spec.halfwidth,
        kind: BoxKind::Closed,
    };
    let target_sup_mu = sup_mu_over_box(&profile, &closed_box)?;
    let mut records = Vec::with_capacity(n_values.len());
    for &n in n_values {
        let means = crate::macro_obs::build_mean_observables(family, n, max_dim)?;
        let model = match (&mut model_supplier, family.m()) {
            (Some(supplier), m) if m >= 2 => Some(supplier(n)?),
            _ => None,
        };
        let projection = box_projection(&means, spec, model.as_deref())?;
        let sites = 2.0 * n as f64 + 1.0;
        let rate = if projection.rank == 0 {
            f64::NEG_INFINITY
        } else {
            (projection.rank as f64).ln() / sites
        };
        records.push(RankRateRecord {
            n,
            rank: projection.rank,
            rate,
            target_sup_mu,
            center: spec.center.clone(),
            halfwidth: spec.halfwidth,
            kind: spec.kind,
        });
    }
    Ok(records)
}

/// A translation-invariant product state, given by its one-site density
/// matrix.
#[derive(Clone, Debug)]
pub struct ProductState {
    rho: HermitianOperator,
    /// Eigenvalues of `rho`, clamped to `[0, 1]` and sorted descending.
    weights: Vec<f64>,
}

impl ProductState {
    /// Validates positivity (eigenvalues >= -1e-12) and unit trace
    /// (within 1e-12).
    pub fn new(rho: HermitianOperator) -> Result<Self> {
        let dec = hermitian_eig(&rho)?;
        if let Some(&lambda) = dec.eigenvalues().first() {
            if lambda < -1e-12 {
                return Err(Error::InvalidParameter(format!(
                    "density matrix has negative eigenvalue {lambda}"
                )));
            }
        }
        let trace = rho.trace();
        if (trace - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParameter(format!(
                "density matrix trace {trace} is not 1"
            )));
        }
        let mut weights: Vec<f64> = dec
            .eigenvalues()
            .iter()
            .map(|&l| l.clamp(0.0, 1.0))
            .collect();
        weights.sort_by(|a, b| b.total_cmp(a));
        Ok(Self { rho, weights })
    }

    pub fn rho(&self) -> &HermitianOperator {
        &self.rho
    }

    pub fn d(&self) -> usize {
        self.rho.dim()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
}

/// One `beta_{eps,n}` evaluation.
#[derive(Clone, Debug)]
pub struct BetaRecord {
    pub n: u32,
    pub epsilon: f64,
    /// Minimal rank of a window projection with state mass `>= 1 - epsilon`.
    pub rank: u128,
    /// `log(rank)`.
    pub beta: f64,
    /// `beta / (2n+1)`.
    pub rate: f64,
}

/// Minimal-rank entropy of a product state on the window `[-n, n]`.
///
/// The optimal projection at fixed rank takes top eigenvectors of the
/// window state, so the minimum is a greedy prefix of the descending
/// product spectrum. The spectrum is enumerated combinatorially — one
/// (value, multiplicity) block per composition of `2n+1` into `d` parts —
/// never materializing the `d^(2n+1)` eigenvalues.
pub fn beta_min_rank(state: &ProductState, epsilon: f64, n: u32) -> Result<BetaRecord> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "epsilon must lie strictly between 0 and 1, got {epsilon}"
        )));
    }
    let sites = 2 * n as usize + 1;
    let d = state.d();
    // Spectrum blocks: for counts (c_1..c_d) summing to `sites`, the value
    // prod w_i^{c_i} occurs with multiplicity sites!/(prod c_i!).
    let mut blocks: Vec<(f64, u128)> = Vec::new();
    let mut counts = vec![0u32; d];
    enumerate_compositions(sites as u32, d, 0, &mut counts, &mut |c| {
        let value: f64 = c
            .iter()
            .zip(state.weights())
            .map(|(&k, &w)| w.powi(k as i32))
            .product();
        let mult = multinomial(sites as u32, c)?;
        blocks.push((value, mult));
        Ok(())
    })?;
    blocks.sort_by(|a, b| b.0.total_cmp(&a.0));
    let target = 1.0 - epsilon;
    let mut mass = 0.0_f64;
    let mut rank: u128 = 0;
    for &(value, mult) in &blocks {
        if mass >= target {
            break;
        }
        let block_mass = value * mult as f64;
        if mass + block_mass >= target && value > 0.0 {
            // Partial block: the smallest count of this value closing the
            // gap (tiny slop guards against an extra eigenvalue from
            // round-off when the gap is an exact multiple of the value).
            let need = (((target - mass) / value) - 1e-12).ceil().max(1.0);
            let need = (need as u128).min(mult);
            rank += need;
            mass += need as f64 * value;
        } else {
            rank += mult;
            mass += block_mass;
        }
    }
    if mass < target {
        return Err(Error::Inconclusive(format!(
            "greedy prefix exhausted the spectrum at mass {mass} < {target}; \
             the state is not normalized enough for this epsilon"
        )));
    }
    let beta = (rank as f64).ln();
    Ok(BetaRecord {
        n,
        epsilon,
        rank,
        beta,
        rate: beta / sites as f64,
    })
}

/// Mean entropy of the product state: the von Neumann entropy of the
/// one-site density matrix (the window entropy is additive, so the per-site
/// limit is exact at every n).
pub fn mean_entropy_product(state: &ProductState) -> f64 {
    crate::thermo::spectral_entropy(state.weights())
}

/// Calls `f` for every vector of `d` nonnegative counts summing to `total`.
fn enumerate_compositions(
    total: u32,
    d: usize,
    pos: usize,
    counts: &mut Vec<u32>,
    f: &mut impl FnMut(&[u32]) -> Result<()>,
) -> Result<()> {
    if pos == d - 1 {
        counts[pos] = total;
        return f(counts);
    }
    for k in 0..=total {
        counts[pos] = k;
        enumerate_compositions(total - k, d, pos + 1, counts, f)?;
    }
    Ok(())
}

/// `n! / (c_1! ... c_d!)` as an exact integer, via a product of binomials.
fn multinomial(n: u32, counts: &[u32]) -> Result<u128> {
    debug_assert_eq!(counts.iter().sum::<u32>(), n);
    let mut remaining = n;
    let mut result: u128 = 1;
    for &c in counts {
        result = result
            .checked_mul(binomial(remaining, c)?)
            .ok_or(Error::DimensionOverflow {
                d: counts.len(),
                sites: n,
            })?;
        remaining -= c;
    }
    Ok(result)
}

/// Exact binomial coefficient `C(n, k)`.
pub fn binomial(n: u32, k: u32) -> Result<u128> {
    if k > n {
        return Ok(0);
    }
    let k = k.min(n - k);
    let mut result: u128 = 1;
    for i in 0..k {
        result = result
            .checked_mul((n - i) as u128)
            .ok_or(Error::DimensionOverflow { d: 2, sites: n })?;
        result /= (i + 1) as u128;
    }
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::pauli_z;
    use crate::macro_obs::build_mean_observables;

    fn sigma_z_means(n: u32) -> MeanObservableSet {
        let family = ObservableFamily::new(2, vec![pauli_z()]).unwrap();
        build_mean_observables(&family, n, 1 << 14).unwrap()
    }

    /// Count of mean-sigma_z eigenvalues `(2k - N)/N` inside the box,
    /// weighted by binomial multiplicity.
    fn binomial_count(n: u32, spec: &BoxSpec) -> u128 {
        let sites = 2 * n + 1;
        (0..=sites)
            .filter(|&k| {
                let lambda = (2.0 * k as f64 - sites as f64) / sites as f64;
                spec.contains(&[lambda])
            })
            .map(|k| binomial(sites, k).unwrap())
            .sum()
    }

    #[test]
    fn top_eigenvalue_box_has_rank_one() {
        let means = sigma_z_means(1);
        let spec = BoxSpec::closed(vec![1.0], 0.1).unwrap();
        let proj = box_projection(&means, &spec, None).unwrap();
        assert_eq!(proj.rank, 1);
        assert!((proj.operator.trace() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn central_box_rank_twenty_at_n2() {
        let means = sigma_z_means(2);
        let spec = BoxSpec::closed(vec![0.0], 0.25).unwrap();
        let proj = box_projection(&means, &spec, None).unwrap();
        assert_eq!(proj.rank, 20);
    }

    #[test]
    fn projection_is_idempotent_and_hermitian() {
        let means = sigma_z_means(2);
        let spec = BoxSpec::closed(vec![0.0], 0.25).unwrap();
        let proj = box_projection(&means, &spec, None).unwrap().operator;
        let dec = hermitian_eig(&proj).unwrap();
        for &lambda in dec.eigenvalues() {
            assert!(
                lambda.abs() < 1e-10 || (lambda - 1.0).abs() < 1e-10,
                "non-idempotent eigenvalue {lambda}"
            );
        }
    }

    #[test]
    fn empty_box_yields_explicit_rank_zero() {
        let means = sigma_z_means(2);
        let spec = BoxSpec::closed(vec![5.0], 0.1).unwrap();
        let proj = box_projection(&means, &spec, None).unwrap();
        assert_eq!(proj.rank, 0);
        assert_eq!(proj.operator.frobenius_norm(), 0.0);
    }

    #[test]
    fn closed_includes_boundary_open_excludes() {
        // At n=2 the spectrum is {±1, ±0.6, ±0.2}; a halfwidth of exactly
        // 0.2 around 0 catches ±0.2 only when closed.
        let means = sigma_z_means(2);
        let closed = BoxSpec::closed(vec![0.0], 0.2).unwrap();
        let open = BoxSpec::open(vec![0.0], 0.2).unwrap();
        assert_eq!(box_projection(&means, &closed, None).unwrap().rank, 20);
        assert_eq!(box_projection(&means, &open, None).unwrap().rank, 0);
    }

    #[test]
    fn ranks_match_binomial_oracle() {
        for n in 1..=4u32 {
            let means = sigma_z_means(n);
            for (center, halfwidth) in [(0.0, 0.25), (0.5, 0.3), (-0.7, 0.15), (1.0, 0.05)] {
                for kind in [BoxKind::Closed, BoxKind::Open] {
                    let spec = BoxSpec::new(vec![center], halfwidth, kind).unwrap();
                    let proj = box_projection(&means, &spec, None).unwrap();
                    let oracle = binomial_count(n, &spec);
                    assert_eq!(
                        proj.rank as u128, oracle,
                        "n={n} center={center} halfwidth={halfwidth} kind={kind:?}"
                    );
                }
            }
        }
    }

    #[test]
    fn joint_projection_without_model_is_rejected() {
        let family = ObservableFamily::new(2, vec![pauli_z(), crate::algebra::pauli_x()]).unwrap();
        let means = build_mean_observables(&family, 1, 1 << 14).unwrap();
        let spec = BoxSpec::closed(vec![0.0, 0.0], 0.3).unwrap();
        let err = box_projection(&means, &spec, None).unwrap_err();
        assert!(matches!(err, Error::ModelRequired));
    }

    #[test]
    fn rank_rate_examples_and_upper_bound() {
        let family = ObservableFamily::new(2, vec![pauli_z()]).unwrap();
        let spec = BoxSpec::closed(vec![0.0], 0.25).unwrap();
        let records = rank_rate(&family, &spec, &[2, 5], None, 1 << 14).unwrap();
        assert_eq!(records[0].rank, 20);
        assert!((records[0].rate - 20.0_f64.ln() / 5.0).abs() < 1e-12);
        assert_eq!(records[1].rank, 924);
        assert!((records[1].rate - 924.0_f64.ln() / 11.0).abs() < 1e-12);
        for r in &records {
            assert!((r.target_sup_mu - 2.0_f64.ln()).abs() < 1e-7);
            assert!(r.rate <= r.target_sup_mu + r.slack());
        }
        // The rate approaches the envelope as the window grows.
        assert!(records[1].deficit() < records[0].deficit());
    }

    #[test]
    fn rank_rate_outside_domain_is_zero() {
        let family = ObservableFamily::new(2, vec![pauli_z()]).unwrap();
        let spec = BoxSpec::closed(vec![3.0], 0.25).unwrap();
        let records = rank_rate(&family, &spec, &[1, 2, 3], None, 1 << 14).unwrap();
        for r in &records {
            assert_eq!(r.rank, 0);
            assert_eq!(r.rate, f64::NEG_INFINITY);
            assert_eq!(r.target_sup_mu, f64::NEG_INFINITY);
        }
    }

    fn diag_state(entries: &[f64]) -> ProductState {
        ProductState::new(HermitianOperator::from_real_diagonal(entries).unwrap()).unwrap()
    }

    #[test]
    fn beta_uniform_example() {
        let state = diag_state(&[0.5, 0.5]);
        let record = beta_min_rank(&state, 0.2, 1).unwrap();
        assert_eq!(record.rank, 7);
        assert!((record.beta - 7.0_f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn beta_pure_state_is_zero() {
        let state = diag_state(&[1.0, 0.0]);
        for n in [0u32, 1, 3, 8] {
            let record = beta_min_rank(&state, 0.3, n).unwrap();
            assert_eq!(record.rank, 1);
            assert_eq!(record.beta, 0.0);
        }
    }

    #[test]
    fn beta_rate_stays_near_entropy() {
        // Frozen greedy-prefix values for diag(0.9, 0.1), eps = 0.1:
        // 5 sites need ranks {1 of 0.9^5, 5 of 0.9^4*0.1} = 6; 11 sites need
        // 1 + 11 + 53 = 65. Both rates sit within 0.25 of the one-site
        // entropy. The deviation is NOT monotone in n over small windows
        // (0.0333 at n=2 vs 0.0544 at n=5): the greedy prefix crosses
        // multiplicity blocks at different phases per n.
        let state = diag_state(&[0.9, 0.1]);
        let s = mean_entropy_product(&state);
        assert!((s - 0.325_083).abs() < 1e-6);
        let r2 = beta_min_rank(&state, 0.1, 2).unwrap();
        let r5 = beta_min_rank(&state, 0.1, 5).unwrap();
        assert_eq!(r2.rank, 6);
        assert_eq!(r5.rank, 65);
        assert!((r2.rate - s).abs() < 0.25);
        assert!((r5.rate - s).abs() < 0.25);
        assert!(((r2.rate - s).abs() - 0.0333).abs() < 5e-4);
        assert!(((r5.rate - s).abs() - 0.0544).abs() < 5e-4);
    }

    #[test]
    fn beta_nonincreasing_in_epsilon() {
        let state = diag_state(&[0.7, 0.3]);
        let mut last = f64::INFINITY;
        for eps in [0.05, 0.1, 0.2, 0.4, 0.8] {
            let record = beta_min_rank(&state, eps, 3).unwrap();
            assert!(record.beta <= last + 1e-12);
            last = record.beta;
        }
    }

    #[test]
    fn beta_matches_brute_force_small_windows() {
        // d=3 one-site spectrum, n=1 (27 product eigenvalues): compare the
        // combinatorial greedy against explicit enumeration.
        let weights = [0.6, 0.3, 0.1];
        let state = diag_state(&weights);
        let mut products: Vec<f64> = Vec::new();
        for a in 0..3 {
            for b in 0..3 {
                for c in 0..3 {
                    products.push(weights[a] * weights[b] * weights[c]);
                }
            }
        }
        products.sort_by(|x, y| y.total_cmp(x));
        for eps in [0.05, 0.15, 0.35] {
            let mut mass = 0.0;
            let mut brute = 0usize;
            for &v in &products {
                if mass >= 1.0 - eps {
                    break;
                }
                mass += v;
                brute += 1;
            }
            let record = beta_min_rank(&state, eps, 1).unwrap();
            assert_eq!(record.rank as usize, brute, "eps={eps}");
        }
    }

    #[test]
    fn mean_entropy_examples() {
        assert!((mean_entropy_product(&diag_state(&[0.5, 0.5])) - 2.0_f64.ln()).abs() < 1e-12);
        assert_eq!(mean_entropy_product(&diag_state(&[1.0, 0.0])), 0.0);
    }

    #[test]
    fn product_state_validation() {
        let bad_trace = HermitianOperator::from_real_diagonal(&[0.9, 0.9]).unwrap();
        assert!(ProductState::new(bad_trace).is_err());
        let negative = HermitianOperator::from_real_diagonal(&[1.1, -0.1]).unwrap();
        assert!(ProductState::new(negative).is_err());
    }
}
