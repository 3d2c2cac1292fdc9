//! Random generators for commuting tuples and tangent directions, and census
//! based certifiers for local monotonicity and convexity along segments.
//!
//! A "certified" verdict only means that no violation was found among the
//! reported samples. It is never a proof.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::derivative::df_map;
use crate::divdiff::dd_unchecked;
use crate::error::{Error, Result};
use crate::function::ScalarFunction;
use crate::higher::{higher_derivative_with, CurveJet};
use crate::io::TupleJson;
use crate::joint_diag::{joint_diagonalize, JointDiagonalization};
use crate::matfun::eval_matfun;
use crate::tangency::TangentData;
use crate::types::{
    commutator, hermitian_part, real_diagonal, validate_commuting, CMatrix, CommutingTuple, HermitianMatrix,
    SelfAdjointTuple, Settings,
};

fn gaussian(rng: &mut impl Rng) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Haar-distributed unitary: QR of a complex Gaussian matrix with the phases of
/// `diag(R)` moved into `Q`.
pub fn haar_unitary(n: usize, rng: &mut impl Rng) -> CMatrix {
    let z = DMatrix::from_fn(n, n, |_, _| gaussian(rng));
    let qr = z.qr();
    let (mut q, r) = (qr.q(), qr.r());
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { Complex64::new(1.0, 0.0) };
        for i in 0..n {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// `splitmix64`, used to derive independent per-sample seeds.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// `U diag(x^r) U*` with Haar `U` and joint eigenvalues uniform in the box.
///
/// `pattern` lists multiplicities summing to `n`; each block shares one joint
/// eigenvalue. Without a pattern all `n` eigenvalues are drawn independently.
pub fn random_commuting_tuple(
    n: usize,
    spectrum_box: &[(f64, f64)],
    seed: u64,
    pattern: Option<&[usize]>,
) -> Result<CommutingTuple> {
    if n == 0 || spectrum_box.is_empty() {
        return Err(Error::InvalidInput("need n >= 1 and d >= 1".into()));
    }
    if let Some((lo, hi)) = spectrum_box.iter().find(|(lo, hi)| !(lo <= hi) || !lo.is_finite() || !hi.is_finite()) {
        return Err(Error::InvalidInput(format!("empty spectrum box side [{lo}, {hi}]")));
    }
    let ones = vec![1; n];
    let pattern = pattern.unwrap_or(&ones);
    if pattern.iter().sum::<usize>() != n || pattern.contains(&0) {
        return Err(Error::InvalidInput(format!("multiplicity pattern {pattern:?} does not partition {n}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut points = Vec::with_capacity(n);
    for &m in pattern {
        let x: Vec<f64> = spectrum_box.iter().map(|&(lo, hi)| if lo == hi { lo } else { rng.random_range(lo..hi) }).collect();
        points.extend(std::iter::repeat_n(x, m));
    }
    let u = haar_unitary(n, &mut rng);
    let comps = (0..spectrum_box.len())
        .map(|r| {
            let col: Vec<f64> = points.iter().map(|x| x[r]).collect();
            HermitianMatrix::new(&u * real_diagonal(&col) * u.adjoint())
        })
        .collect::<Result<Vec<_>>>()?;
    validate_commuting(&SelfAdjointTuple::new(comps)?, &Settings::default().tol)
}

/// Draws a pair `(A, B)` with a common eigenbasis, so every convex combination commutes.
pub fn random_commuting_segment(
    n: usize,
    spectrum_box: &[(f64, f64)],
    seed: u64,
) -> Result<(CommutingTuple, CommutingTuple)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let u = haar_unitary(n, &mut rng);
    let mut side = || -> Result<CommutingTuple> {
        let comps = spectrum_box
            .iter()
            .map(|&(lo, hi)| {
                let x: Vec<f64> = (0..n).map(|_| rng.random_range(lo..hi)).collect();
                HermitianMatrix::new(&u * real_diagonal(&x) * u.adjoint())
            })
            .collect::<Result<Vec<_>>>()?;
        validate_commuting(&SelfAdjointTuple::new(comps)?, &Settings::default().tol)
    };
    let a = side()?;
    let b = side()?;
    Ok((a, b))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TangentOptions {
    /// Make every component of the direction positive semidefinite.
    pub psd: bool,
    /// Multiplier on the off-group generator `Y`; `0` gives block-diagonal directions.
    pub y_scale: f64,
}

impl Default for TangentOptions {
    fn default() -> Self {
        TangentOptions { psd: false, y_scale: 1.0 }
    }
}

const PSD_DRAW_BUDGET: usize = 50;

/// A random tangent direction `U([Y, D^r] + GammaTilde^r)U*` at `s`.
pub fn random_tangent_direction(s: &CommutingTuple, seed: u64, psd: bool, settings: &Settings) -> Result<SelfAdjointTuple> {
    let jd = joint_diagonalize(s, settings)?;
    random_tangent_direction_with(&jd, seed, &TangentOptions { psd, ..TangentOptions::default() }, settings)
}

pub fn random_tangent_direction_with(
    jd: &JointDiagonalization,
    seed: u64,
    opts: &TangentOptions,
    settings: &Settings,
) -> Result<SelfAdjointTuple> {
    let (n, d) = (jd.n(), jd.d());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let group = jd.group_index();
    for _ in 0..PSD_DRAW_BUDGET {
        // Commuting blocks: one unitary per group, independent real spectra per coordinate.
        let mut gt = vec![CMatrix::zeros(n, n); d];
        for g in &jd.groups {
            let m = g.len();
            let v = haar_unitary(m, &mut rng);
            for block in gt.iter_mut() {
                let c: Vec<f64> = (0..m)
                    .map(|_| {
                        if opts.psd {
                            10f64.powf(rng.random_range(-3.0..0.0))
                        } else {
                            rng.sample(StandardNormal)
                        }
                    })
                    .collect();
                let b = &v * real_diagonal(&c) * v.adjoint();
                block.view_mut((g.start, g.start), (m, m)).copy_from(&hermitian_part(&b));
            }
        }
        let mut y = CMatrix::zeros(n, n);
        for i in 0..n {
            for j in (i + 1)..n {
                if group[i] != group[j] {
                    let z = gaussian(&mut rng) * opts.y_scale;
                    y[(i, j)] = z;
                    y[(j, i)] = -z.conj();
                }
            }
        }
        let rot: Vec<CMatrix> = (0..d).map(|r| hermitian_part(&commutator(&y, &real_diagonal(&jd.coordinate(r))))).collect();
        let alpha = if opts.psd {
            // Push towards the PSD boundary so the census sees nearly singular directions.
            let min_eig = |a: f64| {
                (0..d)
                    .map(|r| HermitianMatrix::from_matrix_unchecked(hermitian_part(&(&gt[r] + &rot[r] * Complex64::new(a, 0.0)))).min_eigenvalue())
                    .fold(f64::INFINITY, f64::min)
            };
            if min_eig(0.0) <= settings.tol.psd {
                continue;
            }
            let (mut lo, mut hi) = (0.0, 1.0);
            if min_eig(hi) >= 0.0 {
                lo = hi;
            } else {
                for _ in 0..40 {
                    let mid = 0.5 * (lo + hi);
                    if min_eig(mid) >= 0.0 {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
            }
            let a = 0.9 * lo;
            if min_eig(a) < 0.0 {
                continue;
            }
            a
        } else {
            1.0
        };
        let comps = (0..d)
            .map(|r| {
                let inner = hermitian_part(&(&gt[r] + &rot[r] * Complex64::new(alpha, 0.0)));
                HermitianMatrix::new(jd.from_eigenbasis(&inner))
            })
            .collect::<Result<Vec<_>>>()?;
        let delta = SelfAdjointTuple::new(comps)?;
        if opts.psd && delta.components().iter().any(|c| c.min_eigenvalue() < 0.0) {
            continue;
        }
        return Ok(delta);
    }
    Err(Error::RejectionBudgetExhausted(PSD_DRAW_BUDGET))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    CertifiedPositive,
    Refuted,
    Inconclusive,
}

/// The instance behind a refutation, or the worst instance seen otherwise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub sample_index: usize,
    /// Seed that regenerates this instance on its own.
    pub sample_seed: u64,
    pub tuples: Vec<TupleJson>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub direction: Option<TupleJson>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub t_star: Option<f64>,
    pub min_eigenvalue: f64,
}

/// Result of the chord test run next to the second-derivative route.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChordCheck {
    pub verdict: Verdict,
    pub lambdas: Vec<f64>,
    /// Number of midpoint chords tested on neighbouring grid points.
    pub local_chords: usize,
    pub min_eigenvalue: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub property: String,
    pub verdict: Verdict,
    /// Number of instances evaluated; "certified" means no violation among them.
    pub samples: usize,
    #[serde(skip_serializing_if = "is_zero", default)]
    pub skipped: usize,
    pub seed: u64,
    pub min_eigenvalue_observed: f64,
    pub threshold: f64,
    pub witness: Option<Witness>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub grid: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub chord: Option<ChordCheck>,
    /// Largest gap between the two second-derivative implementations.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub route_discrepancy: Option<f64>,
}

fn is_zero(v: &usize) -> bool {
    *v == 0
}

fn verdict_for(min_eig: f64, threshold: f64) -> Verdict {
    if min_eig <= -threshold {
        Verdict::Refuted
    } else {
        Verdict::CertifiedPositive
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonotoneOptions {
    pub n: usize,
    pub samples: usize,
    pub seed: u64,
}

/// One census instance: `(S, Delta)` with every `Delta^r` PSD, and the minimum
/// eigenvalue of `DF(S, Delta)`.
pub fn monotone_instance(
    f: &ScalarFunction,
    n: usize,
    sample_seed: u64,
    settings: &Settings,
) -> Result<(CommutingTuple, SelfAdjointTuple, f64)> {
    let boxes: Vec<(f64, f64)> = f.domain().0.iter().map(|iv| iv.sample_box()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(sample_seed);
    // A third of the instances carry a doubled joint eigenvalue.
    let pattern: Option<Vec<usize>> = if n >= 2 && rng.random_range(0..3) == 0 {
        let mut p = vec![2];
        p.extend(std::iter::repeat_n(1, n - 2));
        Some(p)
    } else {
        None
    };
    let s = random_commuting_tuple(n, &boxes, rng.next_u64(), pattern.as_deref())?;
    let delta = random_tangent_direction(&s, rng.next_u64(), true, settings)?;
    let df = df_map(&s, &delta, f, settings)?;
    let min_eig = df.min_eigenvalue();
    Ok((s, delta, min_eig))
}

/// Samples PSD tangent directions and looks for a derivative with a negative eigenvalue.
pub fn check_local_monotone(f: &ScalarFunction, opts: &MonotoneOptions, settings: &Settings) -> Result<Certificate> {
    f.require_order(1)?;
    if opts.n == 0 {
        return Err(Error::InvalidInput("n must be at least 1".into()));
    }
    let threshold = settings.tol.psd;
    let mut worst: Option<Witness> = None;
    let (mut evaluated, mut skipped) = (0, 0);
    for idx in 0..opts.samples {
        let sample_seed = derive_seed(opts.seed, idx as u64);
        let (s, delta, min_eig) = match monotone_instance(f, opts.n, sample_seed, settings) {
            Ok(v) => v,
            Err(Error::SpectrumOutsideDomain { .. } | Error::GroupingAmbiguous { .. }) => {
                skipped += 1;
                continue;
            }
            Err(e) => return Err(e),
        };
        evaluated += 1;
        if worst.as_ref().is_none_or(|w| min_eig < w.min_eigenvalue) {
            worst = Some(Witness {
                sample_index: idx,
                sample_seed,
                tuples: vec![TupleJson::from_tuple(&s)],
                direction: Some(TupleJson::from_tuple(&delta)),
                t_star: None,
                min_eigenvalue: min_eig,
            });
        }
        if min_eig <= -threshold {
            break;
        }
    }
    let min_observed = worst.as_ref().map_or(f64::NAN, |w| w.min_eigenvalue);
    let verdict = if evaluated == 0 { Verdict::Inconclusive } else { verdict_for(min_observed, threshold) };
    Ok(Certificate {
        property: "local-monotone".into(),
        verdict,
        samples: evaluated,
        skipped,
        seed: opts.seed,
        min_eigenvalue_observed: min_observed,
        threshold,
        witness: worst,
        grid: None,
        chord: None,
        route_discrepancy: None,
    })
}

/// Regenerates a monotonicity witness from its seed and returns the minimum eigenvalue.
pub fn replay_monotone_witness(f: &ScalarFunction, n: usize, witness: &Witness, settings: &Settings) -> Result<f64> {
    Ok(monotone_instance(f, n, witness.sample_seed, settings)?.2)
}

pub const DEFAULT_CONVEX_GRID: usize = 11;
const CHORD_LAMBDAS: [f64; 3] = [0.25, 0.5, 0.75];
const MAX_REFINEMENTS: usize = 6;

/// `t A + (1 - t) B`, the convention used by the convexity check.
fn segment_point(a: &SelfAdjointTuple, b: &SelfAdjointTuple, t: f64) -> Result<SelfAdjointTuple> {
    a.scale(t).add(&b.scale(1.0 - t))
}

fn segment_sample(a: &SelfAdjointTuple, b: &SelfAdjointTuple, t: f64, settings: &Settings) -> Result<CommutingTuple> {
    validate_commuting(&segment_point(a, b, t)?, &settings.tol).map_err(|e| match e {
        Error::NotCommuting(_) => Error::SegmentNotCommuting { lambda: t },
        e => e,
    })
}

/// Second derivative of `F(tA + (1-t)B)` written out as a sum over `k`, with
/// `Gamma = U*(A^1 - B^1)U` and `Delta = U*(A^2 - B^2)U` in the eigenbasis of the point.
pub fn segment_second_derivative(
    f: &ScalarFunction,
    jd: &JointDiagonalization,
    velocity: &SelfAdjointTuple,
) -> Result<HermitianMatrix> {
    if jd.d() != 2 || velocity.d() != 2 {
        return Err(Error::DimensionMismatch("the segment formula needs pairs".into()));
    }
    f.require_order(2)?;
    f.check_spectrum(&jd.eigs)?;
    let n = jd.n();
    let g = jd.to_eigenbasis(velocity.component(0).matrix());
    let h = jd.to_eigenbasis(velocity.component(1).matrix());
    let x = jd.coordinate(0);
    let y = jd.coordinate(1);
    for &xi in &x {
        for &yj in &y {
            f.check_spectrum(&[vec![xi, yj]])?;
        }
    }
    let mut out = CMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let mut acc = Complex64::new(0.0, 0.0);
            for k in 0..n {
                acc += g[(i, k)] * g[(k, j)] * dd_unchecked(f, &[x[i], x[k], x[j]], &[y[j]]);
                acc += g[(i, k)] * h[(k, j)] * dd_unchecked(f, &[x[i], x[k]], &[y[k], y[j]]);
                acc += h[(i, k)] * h[(k, j)] * dd_unchecked(f, &[x[i]], &[y[i], y[k], y[j]]);
            }
            out[(i, j)] = acc * 2.0;
        }
    }
    HermitianMatrix::new(jd.from_eigenbasis(&hermitian_part(&out)))
}

struct GridScan {
    min_eig: f64,
    t_star: f64,
    discrepancy: f64,
}

fn scan_grid(
    f: &ScalarFunction,
    a: &SelfAdjointTuple,
    b: &SelfAdjointTuple,
    points: usize,
    settings: &Settings,
) -> Result<GridScan> {
    let velocity = a.sub(b)?;
    let mut scan = GridScan { min_eig: f64::INFINITY, t_star: 0.0, discrepancy: 0.0 };
    for k in 0..points {
        let t = k as f64 / (points - 1) as f64;
        let s = segment_sample(a, b, t, settings)?;
        let jd = joint_diagonalize(&s, settings)?;
        let jet = CurveJet { t, value: s, derivs: vec![velocity.clone(), SelfAdjointTuple::zeros(a.n(), 2)] };
        let general = higher_derivative_with(f, &jet, &jd, 2)?.matrix;
        let direct = segment_second_derivative(f, &jd, &velocity)?;
        let gap = (general.matrix() - direct.matrix()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        scan.discrepancy = scan.discrepancy.max(gap / (1.0 + direct.max_entry_norm()));
        let m = general.min_eigenvalue();
        if m < scan.min_eig {
            scan.min_eig = m;
            scan.t_star = t;
        }
    }
    Ok(scan)
}

/// Chord inequalities along `tA + (1 - t)B`, using values of `F` only.
///
/// Tests the whole segment at `lambda = 1/4, 1/2, 3/4`, then the midpoint chord
/// of each neighbouring triple on a uniform grid of `grid` points: convexity
/// along the segment means every sub-segment satisfies the chord inequality, and
/// the endpoint chords alone miss concavity confined to part of the segment.
pub fn chord_check(f: &ScalarFunction, a: &CommutingTuple, b: &CommutingTuple, grid: usize, settings: &Settings) -> Result<ChordCheck> {
    let fa = eval_matfun(f, a, settings)?;
    let fb = eval_matfun(f, b, settings)?;
    let mut min_eig = f64::INFINITY;
    for &lam in &CHORD_LAMBDAS {
        let s = segment_sample(a, b, lam, settings)?;
        let fs = eval_matfun(f, &s, settings)?;
        let gap = fa.scale(lam).add(&fb.scale(1.0 - lam)).sub(&fs);
        min_eig = min_eig.min(gap.min_eigenvalue());
    }
    let m = grid.max(3);
    let values = (0..m)
        .map(|k| eval_matfun(f, &segment_sample(a, b, k as f64 / (m - 1) as f64, settings)?, settings))
        .collect::<Result<Vec<_>>>()?;
    for w in values.windows(3) {
        let gap = w[0].add(&w[2]).scale(0.5).sub(&w[1]);
        min_eig = min_eig.min(gap.min_eigenvalue());
    }
    Ok(ChordCheck {
        verdict: verdict_for(min_eig, settings.tol.psd),
        lambdas: CHORD_LAMBDAS.to_vec(),
        local_chords: m - 2,
        min_eigenvalue: min_eig,
    })
}

/// Convexity of `F` along `tA + (1 - t)B` for pairs.
///
/// The second derivative is evaluated on a uniform grid of `[0, 1]`; the grid
/// is refined by halving the spacing until the verdict has stayed the same for
/// two consecutive refinements. The chord test of [`chord_check`] on the
/// initial grid runs alongside; if the two routes disagree the verdict is inconclusive.
pub fn check_convex_segment(
    f: &ScalarFunction,
    a: &CommutingTuple,
    b: &CommutingTuple,
    grid: usize,
    settings: &Settings,
) -> Result<Certificate> {
    a.check_shape(b)?;
    if a.d() != 2 {
        return Err(Error::DimensionMismatch(format!("convexity check needs pairs, got d = {}", a.d())));
    }
    if grid < 2 {
        return Err(Error::InvalidInput("grid needs at least 2 points".into()));
    }
    let threshold = settings.tol.psd;
    let mut points = grid;
    let mut history: Vec<Verdict> = Vec::new();
    let mut scan = scan_grid(f, a, b, points, settings)?;
    history.push(verdict_for(scan.min_eig, threshold));
    while history.len() < 3 || history[history.len() - 1] != history[history.len() - 2] || history[history.len() - 2] != history[history.len() - 3] {
        if history.len() > MAX_REFINEMENTS {
            break;
        }
        points = 2 * points - 1;
        scan = scan_grid(f, a, b, points, settings)?;
        history.push(verdict_for(scan.min_eig, threshold));
    }
    let n = history.len();
    let stable = n >= 3 && history[n - 1] == history[n - 2] && history[n - 2] == history[n - 3];
    let chord = chord_check(f, a, b, grid, settings)?;
    let second = history[n - 1];
    let verdict = if stable && second == chord.verdict { second } else { Verdict::Inconclusive };
    Ok(Certificate {
        property: "convex-segment".into(),
        verdict,
        samples: points,
        skipped: 0,
        seed: settings.seed,
        min_eigenvalue_observed: scan.min_eig,
        threshold,
        witness: Some(Witness {
            sample_index: 0,
            sample_seed: settings.seed,
            tuples: vec![TupleJson::from_tuple(a), TupleJson::from_tuple(b)],
            direction: None,
            t_star: Some(scan.t_star),
            min_eigenvalue: scan.min_eig,
        }),
        grid: Some(points),
        chord: Some(chord),
        route_discrepancy: Some(scan.discrepancy),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelationResidual {
    /// `max |(x_i - x_j) Delta_ij - (y_i - y_j) Gamma_ij|`.
    pub residual: f64,
    /// `(1 + |S|)(1 + |Delta|)` in max-entry norms.
    pub scale: f64,
}

/// Entrywise form of the commutation condition for pairs.
pub fn gamma_delta_relation_check(td: &TangentData) -> Result<RelationResidual> {
    if td.d() != 2 {
        return Err(Error::DimensionMismatch(format!("relation is stated for pairs, got d = {}", td.d())));
    }
    let x = td.diag.coordinate(0);
    let y = td.diag.coordinate(1);
    let (g, h) = (&td.gamma[0], &td.gamma[1]);
    let n = td.n();
    let mut residual = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let lhs = h[(i, j)] * (x[i] - x[j]);
            let rhs = g[(i, j)] * (y[i] - y[j]);
            residual = residual.max((lhs - rhs).norm());
        }
    }
    let scale = (1.0 + td.base.max_entry_norm()) * (1.0 + td.direction.max_entry_norm());
    Ok(RelationResidual { residual, scale })
}
