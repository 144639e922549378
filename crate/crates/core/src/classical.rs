//! Classical single-snapshot AOA estimators: Bartlett beamformer,
//! exhaustive maximum-likelihood grid search, alternating projections,
//! orthogonal matching pursuit, and spatial smoothing + MUSIC.
//!
//! All estimators share the deterministic-ML objective
//! `J(Theta) = ||P_A(Theta) y||^2`, the squared norm of the projection of
//! the observation onto the span of the selected steering vectors. They
//! operate on an angle grid and return the common [`EstimateResult`]
//! envelope.

use std::time::Instant;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::array_model::{steering_vector, ArrayGeometry, Snapshot};
use crate::error::{Error, Result};
use crate::numerics::{hermitian_eig, inner, least_squares, vec_norm_sqr, CMatrix};

/// Angle search grid: inclusive FOV bounds and step, all in degrees.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub fov_deg: (f64, f64),
    pub step_deg: f64,
}

impl GridSpec {
    pub fn new(fov_deg: (f64, f64), step_deg: f64) -> Result<Self> {
        let spec = Self { fov_deg, step_deg };
        spec.validate()?;
        Ok(spec)
    }

    /// Default grid over a centered FOV of the given width, 0.1 degree step.
    pub fn centered(width_deg: f64) -> Result<Self> {
        Self::new((-width_deg / 2.0, width_deg / 2.0), 0.1)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.step_deg > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "grid step must be positive, got {}",
                self.step_deg
            )));
        }
        if self.point_count() < 2 {
            return Err(Error::InvalidParameter(
                "grid must contain at least 2 points".into(),
            ));
        }
        Ok(())
    }

    pub fn point_count(&self) -> usize {
        if self.fov_deg.1 < self.fov_deg.0 {
            return 0;
        }
        // Inclusive of both ends, with slack for floating-point division.
        ((self.fov_deg.1 - self.fov_deg.0) / self.step_deg + 1.0 + 1e-9).floor() as usize
    }

    pub fn angles(&self) -> Vec<f64> {
        (0..self.point_count())
            .map(|i| self.fov_deg.0 + i as f64 * self.step_deg)
            .collect()
    }
}

/// Output envelope common to every estimator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateResult {
    pub method: String,
    pub order: usize,
    /// Estimated angles in degrees, sorted ascending.
    pub angles_deg: Vec<f64>,
    pub objective: f64,
    pub iterations: usize,
    pub runtime_seconds: f64,
}

impl EstimateResult {
    fn new(method: &str, mut angles_deg: Vec<f64>, objective: f64, iterations: usize) -> Self {
        angles_deg.sort_by(|a, b| a.partial_cmp(b).unwrap());
        Self {
            method: method.to_string(),
            order: angles_deg.len(),
            angles_deg,
            objective,
            iterations,
            runtime_seconds: 0.0,
        }
    }

    fn timed(mut self, start: Instant) -> Self {
        self.runtime_seconds = start.elapsed().as_secs_f64();
        self
    }
}

/// Steering vectors for every grid point, precomputed once per estimate.
struct GridAtoms {
    angles: Vec<f64>,
    atoms: Vec<Vec<Complex64>>,
    n: usize,
}

impl GridAtoms {
    fn build(geometry: &ArrayGeometry, grid: &GridSpec) -> Result<Self> {
        grid.validate()?;
        let angles = grid.angles();
        let atoms = angles
            .iter()
            .map(|&t| steering_vector(geometry, t))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            angles,
            atoms,
            n: geometry.element_count(),
        })
    }

    fn len(&self) -> usize {
        self.angles.len()
    }
}

/// Projection objective `J = ||P_A y||^2` for the atoms at `indices`,
/// computed from the precomputed correlations `b = A^H y` and the atom
/// Gram matrix via a small Cholesky solve. Returns `None` when the
/// selected atoms are numerically dependent.
fn fit_objective(atoms: &GridAtoms, b: &[Complex64], indices: &[usize]) -> Option<f64> {
    let m = indices.len();
    debug_assert!(m >= 1);
    let n = atoms.n as f64;
    if m == 1 {
        return Some(b[indices[0]].norm_sqr() / n);
    }
    // Gram matrix of the selected atoms; diagonal is the element count.
    let mut g = [[Complex64::ZERO; 4]; 4];
    for i in 0..m {
        g[i][i] = Complex64::new(n, 0.0);
        for j in (i + 1)..m {
            let v = inner(&atoms.atoms[indices[i]], &atoms.atoms[indices[j]]);
            g[i][j] = v;
            g[j][i] = v.conj();
        }
    }
    // J = b^H G^{-1} b by Cholesky: G = L L^H, solve L z = b.
    let mut l = [[Complex64::ZERO; 4]; 4];
    for i in 0..m {
        for j in 0..=i {
            let mut sum = g[i][j];
            for k in 0..j {
                sum -= l[i][k] * l[j][k].conj();
            }
            if i == j {
                let d = sum.re;
                if d <= 1e-9 * n {
                    return None; // numerically dependent atoms
                }
                l[i][j] = Complex64::new(d.sqrt(), 0.0);
            } else {
                l[i][j] = sum / l[j][j].re;
            }
        }
    }
    let mut z = [Complex64::ZERO; 4];
    for i in 0..m {
        let mut sum = b[indices[i]];
        for k in 0..i {
            sum -= l[i][k] * z[k];
        }
        z[i] = sum / l[i][i].re;
    }
    Some(z[..m].iter().map(|v| v.norm_sqr()).sum())
}

fn correlations(atoms: &GridAtoms, y: &[Complex64]) -> Vec<Complex64> {
    atoms.atoms.iter().map(|a| inner(a, y)).collect()
}

/// Bartlett beamformer spectrum `B(theta) = |a(theta)^H y|^2 / N` over the
/// grid.
pub fn bartlett_spectrum(
    geometry: &ArrayGeometry,
    y: &[Complex64],
    grid: &GridSpec,
) -> Result<Vec<f64>> {
    check_observation(geometry, y)?;
    let atoms = GridAtoms::build(geometry, grid)?;
    let n = geometry.element_count() as f64;
    Ok(atoms.atoms.iter().map(|a| inner(a, y).norm_sqr() / n).collect())
}

fn check_observation(geometry: &ArrayGeometry, y: &[Complex64]) -> Result<()> {
    if y.len() != geometry.element_count() {
        return Err(Error::DimensionMismatch {
            context: format!(
                "observation len {} vs {} elements",
                y.len(),
                geometry.element_count()
            ),
        });
    }
    Ok(())
}

/// Bartlett estimate: the `m` largest strict local maxima of the spectrum,
/// padded with the largest remaining grid values when the spectrum has
/// fewer peaks.
pub fn bartlett_estimate(
    geometry: &ArrayGeometry,
    snapshot: &Snapshot,
    m: usize,
    grid: &GridSpec,
) -> Result<EstimateResult> {
    let start = Instant::now();
    let spectrum = bartlett_spectrum(geometry, &snapshot.observation, grid)?;
    let atoms = GridAtoms::build(geometry, grid)?;
    let picks = peak_indices(&spectrum, m)?;
    let angles = picks.iter().map(|&i| atoms.angles[i]).collect::<Vec<_>>();
    let objective = picks.iter().map(|&i| spectrum[i]).fold(f64::MIN, f64::max);
    Ok(EstimateResult::new("bartlett", angles, objective, 1).timed(start))
}

/// Indices of the `m` largest strict local maxima (3-point rule, boundary
/// points eligible), padded with the largest remaining values.
fn peak_indices(values: &[f64], m: usize) -> Result<Vec<usize>> {
    if values.len() < m {
        return Err(Error::Estimation(format!(
            "{} grid points cannot produce {m} peaks",
            values.len()
        )));
    }
    let p = values.len();
    let is_peak = |i: usize| -> bool {
        let left_ok = i == 0 || values[i] > values[i - 1];
        let right_ok = i == p - 1 || values[i] > values[i + 1];
        left_ok && right_ok
    };
    let mut peaks: Vec<usize> = (0..p).filter(|&i| is_peak(i)).collect();
    peaks.sort_by(|&a, &b| values[b].partial_cmp(&values[a]).unwrap().then(a.cmp(&b)));
    let mut picked: Vec<usize> = peaks.into_iter().take(m).collect();
    if picked.len() < m {
        let mut rest: Vec<usize> = (0..p).filter(|i| !picked.contains(i)).collect();
        rest.sort_by(|&a, &b| values[b].partial_cmp(&values[a]).unwrap().then(a.cmp(&b)));
        picked.extend(rest.into_iter().take(m - picked.len()));
    }
    Ok(picked)
}

/// Refusal threshold for the exhaustive search, in objective evaluations
/// weighted by the per-evaluation cost `(N^2 + M^3)`.
const ML_OP_BUDGET: f64 = 5e11;

/// Operation count of the exhaustive ML search per the complexity model
/// `(N^2 + M^3) * P^M`.
pub fn ml_operation_count(n: usize, m: usize, grid_points: usize) -> f64 {
    ((n * n + m * m * m) as f64) * (grid_points as f64).powi(m as i32)
}

/// Exhaustive deterministic-ML estimate: the unordered `m`-tuple of grid
/// angles maximizing `J`. Refuses `m > 3` and op counts beyond the budget.
pub fn ml_estimate(
    geometry: &ArrayGeometry,
    snapshot: &Snapshot,
    m: usize,
    grid: &GridSpec,
) -> Result<EstimateResult> {
    let start = Instant::now();
    check_observation(geometry, &snapshot.observation)?;
    let n = geometry.element_count();
    if m == 0 || m > n {
        return Err(Error::InvalidParameter(format!(
            "source count {m} out of range 1..={n}"
        )));
    }
    let p = grid.point_count();
    let ops = ml_operation_count(n, m, p);
    if m > 3 || ops > ML_OP_BUDGET {
        return Err(Error::MlBudgetExceeded {
            m,
            grid_points: p,
            estimated_ops: ops,
        });
    }
    let atoms = GridAtoms::build(geometry, grid)?;
    let b = correlations(&atoms, &snapshot.observation);

    // (J, combination); total order with lexicographically-smallest tuple
    // winning ties keeps the parallel reduction deterministic.
    #[derive(Clone, Copy)]
    struct Best {
        j: f64,
        combo: [usize; 3],
        m: usize,
    }
    impl Best {
        fn better(self, other: Best) -> Best {
            if other.j > self.j
                || (other.j == self.j && other.combo[..other.m] < self.combo[..self.m])
            {
                other
            } else {
                self
            }
        }
    }
    let empty = Best {
        j: f64::NEG_INFINITY,
        combo: [usize::MAX; 3],
        m,
    };

    let best = (0..atoms.len())
        .into_par_iter()
        .map(|i0| {
            let mut local = empty;
            match m {
                1 => {
                    if let Some(j) = fit_objective(&atoms, &b, &[i0]) {
                        local = local.better(Best {
                            j,
                            combo: [i0, usize::MAX, usize::MAX],
                            m,
                        });
                    }
                }
                2 => {
                    for i1 in (i0 + 1)..atoms.len() {
                        if let Some(j) = fit_objective(&atoms, &b, &[i0, i1]) {
                            local = local.better(Best {
                                j,
                                combo: [i0, i1, usize::MAX],
                                m,
                            });
                        }
                    }
                }
                _ => {
                    for i1 in (i0 + 1)..atoms.len() {
                        for i2 in (i1 + 1)..atoms.len() {
                            if let Some(j) = fit_objective(&atoms, &b, &[i0, i1, i2]) {
                                local = local.better(Best {
                                    j,
                                    combo: [i0, i1, i2],
                                    m,
                                });
                            }
                        }
                    }
                }
            }
            local
        })
        .reduce(|| empty, Best::better);

    if !best.j.is_finite() {
        return Err(Error::Estimation("no valid angle combination".into()));
    }
    let angles: Vec<f64> = best.combo[..m].iter().map(|&i| atoms.angles[i]).collect();
    Ok(EstimateResult::new("ml", angles, best.j, 1).timed(start))
}

/// Width (in grid steps per source) of the joint neighborhood searched
/// when cyclic refinement stalls. Single-coordinate argmax on a grid
/// routinely parks one step short of the joint optimum; the bounded joint
/// move closes that gap without changing the complexity class.
const AP_POLISH_STEPS: isize = 3;

/// Best improving joint move of all sources within `AP_POLISH_STEPS` grid
/// steps of the current selection.
fn ap_polish(
    atoms: &GridAtoms,
    b: &[Complex64],
    selected: &[usize],
    current_j: f64,
) -> Option<(Vec<usize>, f64)> {
    let m = selected.len();
    let w = AP_POLISH_STEPS;
    let span = (2 * w + 1) as usize;
    let mut best: Option<(Vec<usize>, f64)> = None;
    let mut combo = vec![0usize; m];
    let total = span.pow(m as u32);
    let mut candidate = vec![0usize; m];
    'outer: for code in 0..total {
        let mut c = code;
        for slot in 0..m {
            combo[slot] = c % span;
            c /= span;
        }
        for slot in 0..m {
            let offset = combo[slot] as isize - w;
            let idx = selected[slot] as isize + offset;
            if idx < 0 || idx >= atoms.len() as isize {
                continue 'outer;
            }
            candidate[slot] = idx as usize;
        }
        for i in 0..m {
            for j in (i + 1)..m {
                if candidate[i] == candidate[j] {
                    continue 'outer;
                }
            }
        }
        if let Some(j) = fit_objective(atoms, b, &candidate) {
            if j > current_j && best.as_ref().is_none_or(|(_, bj)| j > *bj) {
                best = Some((candidate.clone(), j));
            }
        }
    }
    best
}

/// How the sequential initialization scores candidate angles.
#[derive(Clone, Copy, PartialEq)]
enum ApInit {
    /// Source i maximizes the joint projection objective with sources
    /// 0..i fixed.
    JointProjection,
    /// Source i maximizes the matched-filter response of the current
    /// least-squares residual. Robust against the coherent-pair trap
    /// where the joint objective prefers an atom adjacent to an already
    /// selected one.
    ResidualMatchedFilter,
}

struct ApRun {
    selected: Vec<usize>,
    trace: Vec<f64>,
    passes: usize,
}

fn run_ap(
    atoms: &GridAtoms,
    b: &[Complex64],
    y: &[Complex64],
    m: usize,
    max_passes: usize,
    init: ApInit,
) -> Result<ApRun> {
    let mut trace = Vec::new();

    // Best grid index for slot `slot` with the other selected indices held
    // fixed; ties go to the smallest grid index.
    let argmax_slot = |selected: &[usize], slot: usize| -> Option<(usize, f64)> {
        let mut indices: Vec<usize> = selected.to_vec();
        let mut best: Option<(usize, f64)> = None;
        for cand in 0..atoms.len() {
            if selected
                .iter()
                .enumerate()
                .any(|(s, &idx)| s != slot && idx == cand)
            {
                continue; // duplicate atoms are excluded from the model
            }
            indices[slot] = cand;
            if let Some(j) = fit_objective(atoms, b, &indices) {
                if best.is_none_or(|(_, bj)| j > bj) {
                    best = Some((cand, j));
                }
            }
        }
        best
    };

    let mut selected: Vec<usize> = Vec::with_capacity(m);
    match init {
        ApInit::JointProjection => {
            for i in 0..m {
                selected.push(usize::MAX);
                let (idx, j) = argmax_slot(&selected, i).ok_or_else(|| {
                    Error::Estimation("AP initialization found no valid angle".into())
                })?;
                selected[i] = idx;
                trace.push(j);
            }
        }
        ApInit::ResidualMatchedFilter => {
            let mut residual = y.to_vec();
            for _ in 0..m {
                let pick = (0..atoms.len())
                    .filter(|i| !selected.contains(i))
                    .map(|i| (i, inner(&atoms.atoms[i], &residual).norm_sqr()))
                    .max_by(|a, b| a.1.partial_cmp(&b.1).unwrap().then(b.0.cmp(&a.0)));
                let Some((idx, _)) = pick else {
                    return Err(Error::Estimation(
                        "AP initialization found no valid angle".into(),
                    ));
                };
                selected.push(idx);
                let (coeffs, j) = match ls_fit(atoms, y, &selected) {
                    Some(v) => v,
                    None => {
                        selected.pop();
                        return Err(Error::Estimation(
                            "AP initialization hit dependent atoms".into(),
                        ));
                    }
                };
                residual = y.to_vec();
                for (&idx, c) in selected.iter().zip(&coeffs) {
                    for (r, a) in residual.iter_mut().zip(&atoms.atoms[idx]) {
                        *r -= a * c;
                    }
                }
                trace.push(j);
            }
        }
    }

    let mut passes = 0;
    while passes < max_passes {
        passes += 1;
        let before = selected.clone();
        for slot in 0..m {
            let (idx, j) = argmax_slot(&selected, slot)
                .ok_or_else(|| Error::Estimation("AP refinement found no valid angle".into()))?;
            selected[slot] = idx;
            trace.push(j);
        }
        if selected == before {
            let current = *trace.last().unwrap();
            match ap_polish(atoms, b, &selected, current) {
                Some((new_selected, j)) => {
                    selected = new_selected;
                    trace.push(j);
                }
                None => break,
            }
        }
    }

    Ok(ApRun {
        selected,
        trace,
        passes,
    })
}

/// Least-squares fit of `y` on the selected atoms; returns the gains and
/// the captured energy `||y||^2 - ||r||^2` (equals the projection
/// objective J).
fn ls_fit(atoms: &GridAtoms, y: &[Complex64], selected: &[usize]) -> Option<(Vec<Complex64>, f64)> {
    let cols: Vec<Vec<Complex64>> = selected.iter().map(|&i| atoms.atoms[i].clone()).collect();
    let a = CMatrix::from_columns(&cols).ok()?;
    let s = least_squares(&a, y).ok()?;
    let fitted = a.mul_vec(&s).ok()?;
    let res: f64 = y
        .iter()
        .zip(&fitted)
        .map(|(yi, fi)| (yi - fi).norm_sqr())
        .sum();
    Some((s, vec_norm_sqr(y) - res))
}

/// Alternating-projection estimate with trace of the objective after each
/// single-angle update.
pub fn ap_estimate_with_trace(
    geometry: &ArrayGeometry,
    snapshot: &Snapshot,
    m: usize,
    grid: &GridSpec,
    max_passes: usize,
) -> Result<(EstimateResult, Vec<f64>)> {
    let start = Instant::now();
    check_observation(geometry, &snapshot.observation)?;
    let n = geometry.element_count();
    if m == 0 || m > n {
        return Err(Error::InvalidParameter(format!(
            "source count {m} out of range 1..={n}"
        )));
    }
    if max_passes == 0 {
        return Err(Error::InvalidParameter("AP needs at least one pass".into()));
    }
    let atoms = GridAtoms::build(geometry, grid)?;
    let y = &snapshot.observation;
    let b = correlations(&atoms, y);

    // Two deterministic starts; keep the run with the better objective.
    let joint = run_ap(&atoms, &b, y, m, max_passes, ApInit::JointProjection)?;
    let best = if m > 1 {
        let mf = run_ap(&atoms, &b, y, m, max_passes, ApInit::ResidualMatchedFilter)?;
        if mf.trace.last().unwrap() > joint.trace.last().unwrap() {
            mf
        } else {
            joint
        }
    } else {
        joint
    };

    let objective = *best.trace.last().unwrap();
    let angles: Vec<f64> = best.selected.iter().map(|&i| atoms.angles[i]).collect();
    Ok((
        EstimateResult::new("ap", angles, objective, best.passes).timed(start),
        best.trace,
    ))
}

/// Alternating-projection maximization of the ML objective: sequential
/// initialization then cyclic per-source refinement, stopping after
/// `max_passes` full passes or when no angle changes.
pub fn ap_estimate(
    geometry: &ArrayGeometry,
    snapshot: &Snapshot,
    m: usize,
    grid: &GridSpec,
    max_passes: usize,
) -> Result<EstimateResult> {
    Ok(ap_estimate_with_trace(geometry, snapshot, m, grid, max_passes)?.0)
}

/// Orthogonal matching pursuit: greedy atom selection with full
/// least-squares gain refits.
pub fn omp_estimate(
    geometry: &ArrayGeometry,
    snapshot: &Snapshot,
    m: usize,
    grid: &GridSpec,
) -> Result<EstimateResult> {
    let start = Instant::now();
    check_observation(geometry, &snapshot.observation)?;
    let n = geometry.element_count();
    if m == 0 || m > n {
        return Err(Error::InvalidParameter(format!(
            "source count {m} out of range 1..={n}"
        )));
    }
    let atoms = GridAtoms::build(geometry, grid)?;
    let y = &snapshot.observation;
    let mut residual = y.clone();
    let mut selected: Vec<usize> = Vec::with_capacity(m);
    let mut gains: Vec<Complex64> = Vec::new();

    while selected.len() < m {
        // Candidates ranked by |a^H r|, skipping already-selected and any
        // atom that turns out rank-deficient with the current selection.
        let mut ranked: Vec<(usize, f64)> = (0..atoms.len())
            .filter(|i| !selected.contains(i))
            .map(|i| (i, inner(&atoms.atoms[i], &residual).norm_sqr()))
            .collect();
        ranked.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));

        let mut advanced = false;
        for (cand, _) in ranked {
            let mut trial = selected.clone();
            trial.push(cand);
            let a = CMatrix::from_columns(
                &trial.iter().map(|&i| atoms.atoms[i].clone()).collect::<Vec<_>>(),
            )?;
            match least_squares(&a, y) {
                Ok(s) => {
                    let fitted = a.mul_vec(&s)?;
                    residual = y.iter().zip(fitted).map(|(yi, fi)| yi - fi).collect();
                    selected = trial;
                    gains = s;
                    advanced = true;
                    break;
                }
                Err(Error::IllConditioned { .. }) => continue,
                Err(e) => return Err(e),
            }
        }
        if !advanced {
            return Err(Error::Estimation(
                "OMP exhausted the grid without finding an independent atom".into(),
            ));
        }
    }

    let _ = gains;
    let objective = vec_norm_sqr(y) - vec_norm_sqr(&residual);
    let angles: Vec<f64> = selected.iter().map(|&i| atoms.angles[i]).collect();
    Ok(EstimateResult::new("omp", angles, objective, m).timed(start))
}

/// Forward spatially smoothed covariance of one snapshot.
#[derive(Debug, Clone)]
pub struct SmoothedCovariance {
    pub matrix: CMatrix,
    pub subarray_size: usize,
    pub subarray_count: usize,
    /// Element positions of the leading subarray, for steering vectors.
    pub subarray_positions: Vec<f64>,
    pub wavelength: f64,
}

/// Averages outer products of the `L = N - Q + 1` overlapping length-`Q`
/// windows of the observation.
pub fn spatial_smooth(
    geometry: &ArrayGeometry,
    snapshot: &Snapshot,
    subarray_size: usize,
) -> Result<SmoothedCovariance> {
    check_observation(geometry, &snapshot.observation)?;
    let n = geometry.element_count();
    let q = subarray_size;
    if q == 0 || q > n {
        return Err(Error::InvalidParameter(format!(
            "subarray size {q} out of range 1..={n}"
        )));
    }
    let l = n - q + 1;
    let mut r = CMatrix::zeros(q, q);
    for start in 0..l {
        let w = &snapshot.observation[start..start + q];
        for i in 0..q {
            for j in 0..q {
                r[(i, j)] += w[i] * w[j].conj();
            }
        }
    }
    let scale = 1.0 / l as f64;
    let r = r.scaled(Complex64::new(scale, 0.0));
    Ok(SmoothedCovariance {
        matrix: r,
        subarray_size: q,
        subarray_count: l,
        subarray_positions: geometry.positions()[..q].to_vec(),
        wavelength: geometry.wavelength(),
    })
}

/// MUSIC pseudospectrum peaks on the smoothed covariance: the `m` largest
/// strict local maxima of `1 / ||E_n^H a_Q(theta)||^2`, padded with global
/// maxima when fewer peaks exist.
pub fn music_estimate(
    cov: &SmoothedCovariance,
    m: usize,
    grid: &GridSpec,
) -> Result<EstimateResult> {
    let start = Instant::now();
    let q = cov.subarray_size;
    if m == 0 || m >= q {
        return Err(Error::InvalidParameter(format!(
            "MUSIC needs 1 <= M < Q, got M={m}, Q={q}"
        )));
    }
    let eig = hermitian_eig(&cov.matrix)?;
    // Noise subspace: eigenvectors of the Q - M smallest eigenvalues.
    let noise_cols: Vec<Vec<Complex64>> =
        (m..q).map(|k| eig.eigenvectors.column(k)).collect();

    let sub_geom = ArrayGeometry::new(cov.subarray_positions.clone(), cov.wavelength)?;
    let angles = grid.angles();
    grid.validate()?;
    let spectrum: Vec<f64> = angles
        .iter()
        .map(|&theta| {
            let a = steering_vector(&sub_geom, theta)?;
            let denom: f64 = noise_cols.iter().map(|e| inner(e, &a).norm_sqr()).sum();
            Ok(1.0 / denom.max(1e-300))
        })
        .collect::<Result<_>>()?;

    let picks = peak_indices(&spectrum, m)?;
    let objective = picks.iter().map(|&i| spectrum[i]).fold(f64::MIN, f64::max);
    let est_angles: Vec<f64> = picks.iter().map(|&i| angles[i]).collect();
    Ok(EstimateResult::new("music", est_angles, objective, 1).timed(start))
}
