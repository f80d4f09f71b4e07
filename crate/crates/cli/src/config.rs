//! Experiment configuration: JSON schema, validation, and conversion into
//! library types.
//!
//! Matrices are row-major arrays of `[re, im]` pairs, so every input is
//! exactly representable and diff-able. Unknown fields are rejected — a
//! typo in a config is an error, not a silently ignored option.

use faer::Mat;
use macrospin_core::{
    BoxKind, BoxSpec, DualSolverSettings, HermitianOperator, Interaction, ObservableFamily,
    ProductState,
};
use num_complex::Complex64;
use serde::Deserialize;
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;

use crate::{CliError, CliResult};

/// A matrix as a flat row-major list of `[re, im]` entries.
pub type MatrixDto = Vec<[f64; 2]>;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilyDto {
    pub d: usize,
    pub generators: Vec<MatrixDto>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InteractionDto {
    pub d: usize,
    pub range: u32,
    /// Keys are interval lengths ("1", "2", ...); the matrix for length
    /// `ell` acts on `d^ell`.
    pub terms: BTreeMap<String, MatrixDto>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateDto {
    pub d: usize,
    /// One-site density matrix (PSD, unit trace).
    pub rho: MatrixDto,
}

/// An inclusive 1-d grid `lo, lo + step, ..., hi`.
#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxisDto {
    pub lo: f64,
    pub hi: f64,
    pub step: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandomPointsDto {
    pub count: usize,
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoxDto {
    pub center: Vec<f64>,
    pub halfwidth: f64,
    /// "closed" or "open".
    pub kind: String,
}

/// The on-disk experiment config. Which fields a command needs is
/// documented per subcommand; extra sections for other commands are fine,
/// unknown field names are not.
#[derive(Debug, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub family: Option<FamilyDto>,
    pub interactions: Option<Vec<InteractionDto>>,
    pub state: Option<StateDto>,

    pub n_values: Option<Vec<u32>>,
    pub alpha_grid: Option<Vec<AxisDto>>,
    pub x_grid: Option<Vec<AxisDto>>,
    pub random_points: Option<RandomPointsDto>,

    pub epsilon: Option<f64>,
    pub eta: Option<f64>,
    pub resolution: Option<f64>,

    pub tau: Option<f64>,
    pub emit_model: Option<bool>,

    #[serde(rename = "box")]
    pub box_spec: Option<BoxDto>,
    pub use_model: Option<bool>,

    pub epsilons: Option<Vec<f64>>,
    pub block_half_width: Option<u32>,

    pub grad_tol: Option<f64>,
    pub seed: Option<u64>,
    pub max_dim: Option<usize>,
}

/// Parsed config plus the run-wide knobs derived from it: the hash of the
/// raw bytes (recorded in every artifact), the effective seed, and the
/// dense-dimension cap.
pub struct RunContext {
    pub config: ExperimentConfig,
    pub config_sha256: String,
    pub seed: u64,
    pub max_dim: usize,
}

impl RunContext {
    pub fn parse(
        raw: &[u8],
        seed_override: Option<u64>,
        max_dim_override: Option<usize>,
    ) -> CliResult<Self> {
        let config: ExperimentConfig = serde_json::from_slice(raw)
            .map_err(|e| CliError::Invalid(format!("config parse error: {e}")))?;
        let config_sha256 = hex_digest(raw);
        let seed = seed_override.or(config.seed).unwrap_or(0);
        let max_dim = max_dim_override
            .or(config.max_dim)
            .unwrap_or(macrospin_core::tol::MAX_DENSE_DIM);
        Ok(RunContext {
            config,
            config_sha256,
            seed,
            max_dim,
        })
    }

    pub fn family(&self) -> CliResult<ObservableFamily> {
        let dto = self
            .config
            .family
            .as_ref()
            .ok_or_else(|| CliError::Invalid("config needs a \"family\" section".into()))?;
        let generators = dto
            .generators
            .iter()
            .enumerate()
            .map(|(i, g)| {
                matrix_from(g, dto.d).map_err(|e| CliError::Invalid(format!("generator {i}: {e}")))
            })
            .collect::<CliResult<Vec<_>>>()?;
        Ok(ObservableFamily::new(dto.d, generators)?)
    }

    pub fn interactions(&self) -> CliResult<Vec<Interaction>> {
        let dtos =
            self.config.interactions.as_ref().ok_or_else(|| {
                CliError::Invalid("config needs an \"interactions\" section".into())
            })?;
        dtos.iter()
            .enumerate()
            .map(|(i, dto)| {
                interaction_from(dto)
                    .map_err(|e| CliError::Invalid(format!("interaction {i}: {e}")))
            })
            .collect()
    }

    pub fn product_state(&self) -> CliResult<ProductState> {
        let dto = self
            .config
            .state
            .as_ref()
            .ok_or_else(|| CliError::Invalid("config needs a \"state\" section".into()))?;
        let rho = matrix_from(&dto.rho, dto.d)
            .map_err(|e| CliError::Invalid(format!("state rho: {e}")))?;
        Ok(ProductState::new(rho)?)
    }

    pub fn n_values(&self) -> CliResult<&[u32]> {
        match self.config.n_values.as_deref() {
            Some(values) if !values.is_empty() => Ok(values),
            _ => Err(CliError::Invalid(
                "config needs a non-empty \"n_values\" list".into(),
            )),
        }
    }

    pub fn box_spec(&self) -> CliResult<BoxSpec> {
        let dto = self
            .config
            .box_spec
            .as_ref()
            .ok_or_else(|| CliError::Invalid("config needs a \"box\" section".into()))?;
        let kind = match dto.kind.as_str() {
            "closed" => BoxKind::Closed,
            "open" => BoxKind::Open,
            other => {
                return Err(CliError::Invalid(format!(
                    "box kind must be \"closed\" or \"open\", got {other:?}"
                )))
            }
        };
        Ok(BoxSpec::new(dto.center.clone(), dto.halfwidth, kind)?)
    }

    /// Dual solver settings, honoring a `grad_tol` override.
    pub fn solver_settings(&self) -> DualSolverSettings {
        let mut settings = DualSolverSettings::default();
        if let Some(tol) = self.config.grad_tol {
            settings.grad_tol = tol;
        }
        settings
    }

    /// A header comment recording provenance, placed atop every CSV.
    pub fn provenance_comment(&self) -> String {
        format!("# config_sha256={} seed={}", self.config_sha256, self.seed)
    }
}

pub fn hex_digest(raw: &[u8]) -> String {
    let digest = Sha256::digest(raw);
    let mut out = String::with_capacity(64);
    for byte in digest {
        out.push_str(&format!("{byte:02x}"));
    }
    out
}

/// Builds a validated Hermitian matrix from a flat row-major DTO.
pub fn matrix_from(entries: &MatrixDto, dim: usize) -> CliResult<HermitianOperator> {
    if entries.len() != dim * dim {
        return Err(CliError::Invalid(format!(
            "matrix has {} entries, expected {} for dimension {dim}",
            entries.len(),
            dim * dim
        )));
    }
    let mat = Mat::from_fn(dim, dim, |i, j| {
        let [re, im] = entries[i * dim + j];
        Complex64::new(re, im)
    });
    Ok(HermitianOperator::new(mat)?)
}

fn interaction_from(dto: &InteractionDto) -> CliResult<Interaction> {
    let mut terms = BTreeMap::new();
    for (key, matrix) in &dto.terms {
        let len: u32 = key.parse().map_err(|_| {
            CliError::Invalid(format!("term key {key:?} is not an interval length"))
        })?;
        if len == 0 {
            return Err(CliError::Invalid("interval length 0 is not valid".into()));
        }
        let dim = dto
            .d
            .checked_pow(len)
            .ok_or_else(|| CliError::Invalid(format!("d^{len} overflows")))?;
        terms.insert(len, matrix_from(matrix, dim)?);
    }
    Ok(Interaction::new(dto.d, dto.range, terms)?)
}

/// Materializes one axis of a grid, endpoints inclusive.
pub fn axis_points(axis: &AxisDto) -> CliResult<Vec<f64>> {
    if !(axis.step.is_finite() && axis.step > 0.0) {
        return Err(CliError::Invalid(format!(
            "grid step must be positive and finite, got {}",
            axis.step
        )));
    }
    if axis.hi.is_nan() || axis.lo.is_nan() || axis.hi < axis.lo {
        return Err(CliError::Invalid(format!(
            "grid needs lo <= hi, got [{}, {}]",
            axis.lo, axis.hi
        )));
    }
    let span = axis.hi - axis.lo;
    let count = (span / axis.step).round();
    if (span - count * axis.step).abs() > 1e-9 * (1.0 + axis.hi.abs()) {
        return Err(CliError::Invalid(format!(
            "step {} does not divide [{}, {}] evenly",
            axis.step, axis.lo, axis.hi
        )));
    }
    Ok((0..=count as usize)
        .map(|i| axis.lo + i as f64 * axis.step)
        .collect())
}

/// Cartesian product of axes in row-major order (last axis fastest).
pub fn grid_points(axes: &[AxisDto]) -> CliResult<Vec<Vec<f64>>> {
    if axes.is_empty() {
        return Err(CliError::Invalid("grid needs at least one axis".into()));
    }
    let per_axis = axes
        .iter()
        .map(axis_points)
        .collect::<CliResult<Vec<_>>>()?;
    let total: usize = per_axis.iter().map(Vec::len).product();
    let mut points = Vec::with_capacity(total);
    let mut idx = vec![0usize; axes.len()];
    loop {
        points.push(
            idx.iter()
                .zip(&per_axis)
                .map(|(&i, axis)| axis[i])
                .collect::<Vec<f64>>(),
        );
        let mut k = axes.len();
        loop {
            if k == 0 {
                return Ok(points);
            }
            k -= 1;
            idx[k] += 1;
            if idx[k] < per_axis[k].len() {
                break;
            }
            idx[k] = 0;
        }
    }
}
