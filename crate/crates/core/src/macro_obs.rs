//! Spatial mean observables, interval interactions, and coarse graining.
//!
//! For a one-site generator `A` and window `[-n, n]` with `N = 2n + 1` sites,
//! the mean observable is `H = N^{-1} sum_{j=-n}^{n} shift_j(A)`. Pairwise
//! commutators of means satisfy `||[H_i, H_j]|| = ||[A_i, A_j]|| / N`
//! exactly: cross-site terms vanish and the `N` same-site terms each carry
//! weight `N^{-2}`.
//!
//! Interval interactions generalize this to terms supported on blocks of
//! consecutive sites. The interaction norm used throughout weights each term
//! by the inverse of its support size; for translation-invariant interval
//! terms the `ell` intervals of length `ell` containing a fixed site
//! contribute `ell * (1/ell) * ||term_ell||`, so the norm reduces to the sum
//! of the per-length term norms.

use std::collections::BTreeMap;

use faer::Mat;

use crate::algebra::{
    add_embedded_block, checked_pow, commutator_norm, operator_norm, window_dim, window_sites,
    HermitianOperator, C64,
};
use crate::error::{Error, Result};

/// A family of one-site Hermitian generators over a `d`-dimensional site.
#[derive(Clone, Debug)]
pub struct ObservableFamily {
    d: usize,
    generators: Vec<HermitianOperator>,
    norms: Vec<f64>,
}

impl ObservableFamily {
    pub fn new(d: usize, generators: Vec<HermitianOperator>) -> Result<Self> {
        if d < 2 {
            return Err(Error::InvalidParameter(
                "site dimension d must be >= 2".into(),
            ));
        }
        if generators.is_empty() {
            return Err(Error::InvalidParameter(
                "a family needs at least one generator".into(),
            ));
        }
        for g in &generators {
            if g.dim() != d {
                return Err(Error::DimensionMismatch {
                    left: g.dim(),
                    right: d,
                });
            }
        }
        let norms = generators
            .iter()
            .map(operator_norm)
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            d,
            generators,
            norms,
        })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn m(&self) -> usize {
        self.generators.len()
    }

    pub fn generators(&self) -> &[HermitianOperator] {
        &self.generators
    }

    /// Operator norms of the generators.
    pub fn generator_norms(&self) -> &[f64] {
        &self.norms
    }

    /// Per-generator one-site traces divided by `d`: the means at the
    /// maximally mixed state, which sit in the interior of the achievable
    /// mean-value body.
    pub fn center_point(&self) -> Vec<f64> {
        self.generators
            .iter()
            .map(|g| g.trace() / self.d as f64)
            .collect()
    }
}

/// The window means `H_1..H_m` for one value of `n`, plus the per-observable
/// scale bounds used by downstream defaults (clustering thresholds, cell
/// value boxes).
#[derive(Clone, Debug)]
pub struct MeanObservableSet {
    n: u32,
    d: usize,
    operators: Vec<HermitianOperator>,
    scale_norms: Vec<f64>,
}

impl MeanObservableSet {
    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn sites(&self) -> u32 {
        window_sites(self.n)
    }

    pub fn dim(&self) -> usize {
        self.operators[0].dim()
    }

    pub fn m(&self) -> usize {
        self.operators.len()
    }

    pub fn operators(&self) -> &[HermitianOperator] {
        &self.operators
    }

    /// Upper bounds on `||H_i||`: generator norms for one-site families,
    /// interaction norms for interval interactions.
    pub fn scale_norms(&self) -> &[f64] {
        &self.scale_norms
    }
}

/// Builds the spatial means of a one-site family on the window `[-n, n]`.
pub fn build_mean_observables(
    family: &ObservableFamily,
    n: u32,
    max_dim: usize,
) -> Result<MeanObservableSet> {
    let dim = window_dim(family.d(), n, max_dim)?;
    let weight = 1.0 / f64::from(window_sites(n));
    let mut operators = Vec::with_capacity(family.m());
    for g in family.generators() {
        let mut mat = Mat::<C64>::zeros(dim, dim);
        for site in -i64::from(n)..=i64::from(n) {
            add_embedded_block(&mut mat, g, family.d(), site, 1, n, weight)?;
        }
        operators.push(HermitianOperator::new(mat)?);
    }
    Ok(MeanObservableSet {
        n,
        d: family.d(),
        operators,
        scale_norms: family.generator_norms().to_vec(),
    })
}

/// One row of a commutator decay table.
#[derive(Clone, Copy, Debug)]
pub struct DecayRow {
    pub n: u32,
    pub i: usize,
    pub j: usize,
    pub norm: f64,
}

/// Pairwise mean commutator norms across window sizes.
pub fn commutator_decay_profile(
    family: &ObservableFamily,
    n_values: &[u32],
    max_dim: usize,
) -> Result<Vec<DecayRow>> {
    let mut rows = Vec::new();
    for &n in n_values {
        let means = build_mean_observables(family, n, max_dim)?;
        for i in 0..means.m() {
            for j in (i + 1)..means.m() {
                let norm = commutator_norm(&means.operators()[i], &means.operators()[j])?;
                rows.push(DecayRow { n, i, j, norm });
            }
        }
    }
    Ok(rows)
}

/// A translation-invariant interval interaction: one representative Hermitian
/// term per interval length `ell` in `[1, range]`, acting on `d^ell`.
#[derive(Clone, Debug)]
pub struct Interaction {
    d: usize,
    range: u32,
    terms: BTreeMap<u32, HermitianOperator>,
}

impl Interaction {
    pub fn new(d: usize, range: u32, terms: BTreeMap<u32, HermitianOperator>) -> Result<Self> {
        if d < 2 {
            return Err(Error::InvalidParameter(
                "site dimension d must be >= 2".into(),
            ));
        }
        if range == 0 {
            return Err(Error::InvalidParameter(
                "interaction range must be >= 1".into(),
            ));
        }
        if terms.is_empty() {
            return Err(Error::InvalidParameter(
                "an interaction needs at least one term".into(),
            ));
        }
        for (&len, term) in &terms {
            if len == 0 || len > range {
                return Err(Error::InvalidParameter(format!(
                    "term length {len} outside [1, {range}]"
                )));
            }
            let expected = checked_pow(d, len).ok_or(Error::DimensionOverflow { d, sites: len })?;
            if term.dim() != expected {
                return Err(Error::DimensionMismatch {
                    left: term.dim(),
                    right: expected,
                });
            }
        }
        Ok(Self { d, range, terms })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn range(&self) -> u32 {
        self.range
    }

    pub fn terms(&self) -> &BTreeMap<u32, HermitianOperator> {
        &self.terms
    }
}

/// Interaction norm: sum over interval lengths of `||term_ell||`.
///
/// This is the support-size-weighted norm `sum_{X ni 0} |X|^{-1} ||Phi(X)||`
/// specialized to translation-invariant interval terms: the `ell` intervals
/// of length `ell` containing site 0 each contribute `ell^{-1} ||term_ell||`.
pub fn interaction_norm(phi: &Interaction) -> Result<f64> {
    let mut acc = 0.0;
    for term in phi.terms.values() {
        acc += operator_norm(term)?;
    }
    Ok(acc)
}

/// Builds interaction means `H_i = N^{-1} sum_{I subset [-n, n]} Phi_i(I)`
/// over all intervals `I` that fit in the window.
pub fn build_interaction_means(
    phis: &[Interaction],
    n: u32,
    max_dim: usize,
) -> Result<MeanObservableSet> {
    if phis.is_empty() {
        return Err(Error::InvalidParameter(
            "at least one interaction required".into(),
        ));
    }
    let d = phis[0].d();
    for phi in phis {
        if phi.d() != d {
            return Err(Error::DimensionMismatch {
                left: phi.d(),
                right: d,
            });
        }
        if phi.range() > window_sites(n) {
            return Err(Error::RangeExceedsWindow {
                range: phi.range(),
                window: window_sites(n),
            });
        }
    }
    let dim = window_dim(d, n, max_dim)?;
    let weight = 1.0 / f64::from(window_sites(n));
    let mut operators = Vec::with_capacity(phis.len());
    let mut scale_norms = Vec::with_capacity(phis.len());
    for phi in phis {
        let mut mat = Mat::<C64>::zeros(dim, dim);
        for (&len, term) in phi.terms() {
            let last_left = i64::from(n) - i64::from(len) + 1;
            for left in -i64::from(n)..=last_left {
                add_embedded_block(&mut mat, term, d, left, len, n, weight)?;
            }
        }
        operators.push(HermitianOperator::new(mat)?);
        scale_norms.push(interaction_norm(phi)?);
    }
    Ok(MeanObservableSet {
        n,
        d,
        operators,
        scale_norms,
    })
}

/// Per-interaction diagnostics attached to a coarse-grained set.
#[derive(Clone, Copy, Debug)]
pub struct CoarseGrainReport {
    /// Rigorous finite-window bound on `||K_i - H_i||`: the sum over interval
    /// placements of |(weight in K) - (weight in H)| times the term norm.
    pub boundary_bound: f64,
    /// Asymptotic tail, long-range part: term norms of lengths whose diameter
    /// `ell - 1` exceeds `sqrt(M)`.
    pub tail_long_range: f64,
    /// Asymptotic tail, escaping part: support-weighted norms of intervals
    /// containing site 0 that do not fit in the block window `[-M, M]`.
    pub tail_escaping: f64,
}

impl CoarseGrainReport {
    /// The larger of the two asymptotic tail sums.
    pub fn tail_max(&self) -> f64 {
        self.tail_long_range.max(self.tail_escaping)
    }
}

/// Block averages of block means: `K_i = |J|^{-1} sum_{j in J}
/// shift_{(2M+1) j}(H_{i,M})`.
#[derive(Clone, Debug)]
pub struct CoarseGrained {
    block_half_width: u32,
    n: u32,
    operators: Vec<HermitianOperator>,
    reports: Vec<CoarseGrainReport>,
    block_centers: Vec<i64>,
}

impl CoarseGrained {
    pub fn block_half_width(&self) -> u32 {
        self.block_half_width
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn operators(&self) -> &[HermitianOperator] {
        &self.operators
    }

    pub fn reports(&self) -> &[CoarseGrainReport] {
        &self.reports
    }

    /// Centers (in window coordinates) of the included block translates.
    pub fn block_centers(&self) -> &[i64] {
        &self.block_centers
    }
}

/// Coarse-grains interaction means: builds the block mean `H_{i,M}` on
/// `[-M, M]`, translates it to disjoint blocks of width `2M + 1`, keeps the
/// translates whose support fits in `[-n, n]`, and averages them.
///
/// Translates are stepped by the full block width so that included blocks
/// tile a centered sub-window without overlap; a translate whose support
/// exits the window is dropped and the normalization becomes one over the
/// number of included blocks. With this convention a single-site interaction
/// coarse-grains exactly to the spatial mean over the covered sub-window.
pub fn coarse_grain(
    phis: &[Interaction],
    block_half_width: u32,
    n: u32,
    max_dim: usize,
) -> Result<CoarseGrained> {
    let m_block = block_half_width;
    if m_block == 0 {
        return Err(Error::InvalidParameter(
            "block half-width M must be >= 1".into(),
        ));
    }
    if m_block > n {
        return Err(Error::InvalidParameter(format!(
            "block half-width M = {m_block} exceeds window half-width n = {n}"
        )));
    }
    for phi in phis {
        if phi.range() > window_sites(m_block) {
            return Err(Error::RangeExceedsWindow {
                range: phi.range(),
                window: window_sites(m_block),
            });
        }
    }
    let block_means = build_interaction_means(phis, m_block, max_dim)?;
    let d = block_means.d();
    let dim = window_dim(d, n, max_dim)?;
    let width = i64::from(window_sites(m_block));

    // Paper-shaped index set, filtered to translates that fit the window.
    let j_span = i64::from(n / m_block);
    let mut centers = Vec::new();
    for j in -j_span..=j_span {
        let center = width * j;
        if center - i64::from(m_block) >= -i64::from(n)
            && center + i64::from(m_block) <= i64::from(n)
        {
            centers.push(center);
        }
    }
    debug_assert!(!centers.is_empty(), "j = 0 always fits since M <= n");
    let block_weight = 1.0 / centers.len() as f64;

    let mut operators = Vec::with_capacity(phis.len());
    let mut reports = Vec::with_capacity(phis.len());
    for (i, phi) in phis.iter().enumerate() {
        let mut mat = Mat::<C64>::zeros(dim, dim);
        for &center in &centers {
            add_embedded_block(
                &mut mat,
                &block_means.operators()[i],
                d,
                center - i64::from(m_block),
                window_sites(m_block),
                n,
                block_weight,
            )?;
        }
        operators.push(HermitianOperator::new(mat)?);
        reports.push(coarse_grain_report(phi, m_block, n, centers.len() as f64)?);
    }
    Ok(CoarseGrained {
        block_half_width: m_block,
        n,
        operators,
        reports,
        block_centers: centers,
    })
}

/// Weight-mismatch bound and asymptotic tails for one interaction.
fn coarse_grain_report(
    phi: &Interaction,
    m_block: u32,
    n: u32,
    included_blocks: f64,
) -> Result<CoarseGrainReport> {
    let window = f64::from(window_sites(n));
    let block_width = window_sites(m_block);
    let w_h = 1.0 / window;
    let w_k = 1.0 / (included_blocks * f64::from(block_width));

    let mut boundary_bound = 0.0;
    let mut tail_long_range = 0.0;
    let mut tail_escaping = 0.0;
    for (&len, term) in phi.terms() {
        let norm = operator_norm(term)?;
        // Interval counts: every placement inside the window appears in H
        // with weight 1/N; placements inside one of the disjoint included
        // blocks appear in K with weight 1/(|J| * (2M+1)).
        let total = f64::from(window_sites(n) - len + 1);
        let per_block = f64::from(block_width - len + 1);
        let in_blocks = included_blocks * per_block;
        boundary_bound += norm * (in_blocks * (w_k - w_h).abs() + (total - in_blocks) * w_h);

        // Asymptotic tails in the style of the coarse-graining error
        // estimate: long-range terms (diameter above sqrt(M)) and terms
        // containing a fixed site that stick out of the block `[-M, M]`.
        let diam = f64::from(len - 1);
        if diam > f64::from(m_block).sqrt() {
            tail_long_range += norm;
        }
        let num_containing_zero = i64::from(len);
        let lo = (-(i64::from(len) - 1)).max(-i64::from(m_block));
        let hi = 0_i64.min(i64::from(m_block) - i64::from(len) + 1);
        let inside = (hi - lo + 1).max(0);
        let escaping = (num_containing_zero - inside).max(0) as f64;
        tail_escaping += escaping * norm / f64::from(len);
    }
    Ok(CoarseGrainReport {
        boundary_bound,
        tail_long_range,
        tail_escaping,
    })
}

/// Convenience constructor for the nearest-neighbor two-site interaction
/// `term = a (x) a` for a one-site Hermitian `a`.
pub fn nearest_neighbor_interaction(a: &HermitianOperator) -> Result<Interaction> {
    let d = a.dim();
    let dd = d * d;
    let mat = Mat::from_fn(dd, dd, |r, c| {
        let (r1, r2) = (r / d, r % d);
        let (c1, c2) = (c / d, c % d);
        a.entries()[(r1, c1)] * a.entries()[(r2, c2)]
    });
    let term = HermitianOperator::new(mat)?;
    let mut terms = BTreeMap::new();
    terms.insert(2, term);
    Interaction::new(d, 2, terms)
}

/// Convenience constructor for a single-site interaction.
pub fn single_site_interaction(a: &HermitianOperator) -> Result<Interaction> {
    let mut terms = BTreeMap::new();
    terms.insert(1, a.clone());
    Interaction::new(a.dim(), 1, terms)
}
