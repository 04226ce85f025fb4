//! Seeded random instances for every constructible case tag.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::analysis::admissible_frame;
use super::build::{build_case1, build_case2};
use super::{classify_case, CaseTag, Codim2Instance, Codim2Params, Scalars};
use crate::complex_frames::{
    ComplexStructure, Differential, HermitianMetric, InvariantForm, UnitaryFrame,
};
use crate::error::{Error, Result};
use crate::lie_core::Subspace;
use crate::linalg::{self, c, cr, CMat, RMat, I};

const MAX_RETRIES: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GeneratorOptions {
    /// Replace the standard basis by a random one (condition number at most 10).
    pub basis_change: bool,
    /// For `AB_r0`: move the Kähler metric by an exact (1,1)-form so that it stays
    /// Hermitian-symplectic but is no longer Kähler.
    pub metric_perturbation: bool,
}

impl Default for GeneratorOptions {
    fn default() -> Self {
        Self {
            basis_change: false,
            metric_perturbation: true,
        }
    }
}

/// Random instance of the given tag with default options.
pub fn generate(tag: CaseTag, n: usize, seed: u64) -> Result<Codim2Instance> {
    generate_with(tag, n, seed, GeneratorOptions::default())
}

/// Random instance of the given tag; deterministic in `(tag, n, seed, opts)`.
pub fn generate_with(
    tag: CaseTag,
    n: usize,
    seed: u64,
    opts: GeneratorOptions,
) -> Result<Codim2Instance> {
    if tag == CaseTag::AbR2 {
        return Err(Error::UnsupportedTag);
    }
    if n < 2 {
        return Err(Error::Dimension("n must be at least 2".into()));
    }
    if n == 2 && tag == CaseTag::NaGeneric {
        return Err(Error::Generation(
            "NA_Generic needs n >= 3: the trace relation has no Y block to absorb 4 sigma".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((tag as u64) << 32) | n as u64);
    let mut last = String::new();
    for _ in 0..MAX_RETRIES {
        match attempt(tag, n, opts, &mut rng) {
            Ok(inst) => return Ok(inst),
            Err(e) => last = e.to_string(),
        }
    }
    Err(Error::Generation(format!(
        "{tag} n = {n} seed = {seed}: {MAX_RETRIES} samples rejected, last: {last}"
    )))
}

fn attempt(
    tag: CaseTag,
    n: usize,
    opts: GeneratorOptions,
    rng: &mut ChaCha8Rng,
) -> Result<Codim2Instance> {
    let params = sample_params(tag, n, rng)?;
    let mut inst = if tag.is_non_abelian() {
        build_case1(&params)?
    } else {
        build_case2(&params)?
    };
    if tag == CaseTag::AbR0 && opts.metric_perturbation {
        inst = perturb_metric(&inst, rng)?;
    }
    if opts.basis_change {
        inst = random_basis_change(&inst, rng)?;
    }
    let info = classify_case(&inst.alg, &inst.ideal, &inst.j, &inst.g)?;
    if info.tag != tag {
        return Err(Error::Generation(format!(
            "sample classified as {}",
            info.tag
        )));
    }
    Ok(inst)
}

fn uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    rng.gen_range(lo..hi)
}

/// Magnitude in `[lo, hi)` with a random sign.
fn signed(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    let v = uniform(rng, lo, hi);
    if rng.gen_bool(0.5) {
        v
    } else {
        -v
    }
}

fn cnum(rng: &mut ChaCha8Rng) -> Complex64 {
    c(uniform(rng, -1.0, 1.0), uniform(rng, -1.0, 1.0))
}

fn cmat(rng: &mut ChaCha8Rng, r: usize, k: usize) -> CMat {
    CMat::from_fn(r, k, |_, _| cnum(rng))
}

/// Well-conditioned complex matrix: `Q₁ diag(s) Q₂` with `s ∈ [0.5, 2)`.
fn conditioned(rng: &mut ChaCha8Rng, m: usize) -> CMat {
    let q1 = unitary(rng, m);
    let q2 = unitary(rng, m);
    let s = CMat::from_diagonal(&nalgebra::DVector::from_fn(m, |_, _| {
        cr(uniform(rng, 0.5, 2.0))
    }));
    q1 * s * q2
}

fn unitary(rng: &mut ChaCha8Rng, m: usize) -> CMat {
    cmat(rng, m, m).qr().q()
}

fn sample_scalars(tag: CaseTag, rng: &mut ChaCha8Rng) -> Scalars {
    let mut s = Scalars {
        // δ ≥ 0 is the sign convention of admissible frames
        delta: uniform(rng, 0.0, 0.9),
        ..Scalars::default()
    };
    if tag.is_non_abelian() {
        s.sigma = signed(rng, 0.5, 1.5);
    }
    match tag {
        CaseTag::NaGeneric => {
            s.b = signed(rng, 0.5, 1.5);
            s.a = uniform(rng, -1.0, 1.0);
            s.c = -s.a * s.a / s.b;
            s.cp = -(s.a / s.b) * (s.c + s.sigma);
            s.dp = -s.c - 2.0 * s.sigma;
        }
        CaseTag::NaHalfGeneric => {
            s.c = s.sigma;
            s.dp = s.sigma;
            s.cp = uniform(rng, -1.0, 1.0);
        }
        CaseTag::NaDegenerate => {
            s.dp = 2.0 * s.sigma;
            s.cp = uniform(rng, -1.0, 1.0);
        }
        CaseTag::AbR1Sub2 => s.b = signed(rng, 0.5, 1.5),
        CaseTag::AbR1Sub3 => {
            s.cp = signed(rng, 0.5, 1.5);
            s.c = uniform(rng, -1.0, 1.0);
            s.a = s.c * s.c / s.cp;
            s.b = -s.c.powi(3) / (s.cp * s.cp);
            s.dp = -s.c;
        }
        CaseTag::AbR0 | CaseTag::AbR2 => {}
    }
    s
}

fn sample_params(tag: CaseTag, n: usize, rng: &mut ChaCha8Rng) -> Result<Codim2Params> {
    let s = sample_scalars(tag, rng);
    let mut p = Codim2Params::minimal(n, tag, s);
    let m = n - 2;
    if m == 0 {
        return Ok(p);
    }
    let t = s.t();
    let dl = s.delta_p();
    let (y1, y2) = match tag {
        CaseTag::AbR0 => {
            let u = unitary(rng, m);
            let l1 = CMat::from_diagonal(&nalgebra::DVector::from_fn(m, |_, _| {
                if rng.gen_bool(0.25) {
                    cr(0.0)
                } else {
                    cr(signed(rng, 0.3, 1.5))
                }
            }));
            let l2 = CMat::from_diagonal(&nalgebra::DVector::from_fn(m, |_, _| {
                cr(uniform(rng, -1.5, 1.5))
            }));
            let ua = u.adjoint();
            (&u * &l1 * &ua, &u * (l2 - &l1 * t) * &ua)
        }
        _ if tag.is_non_abelian() => {
            // Y₂ = P diag(λ) P⁻¹ with chains λ_{i+1} = λ_i + q; Y₁ supported on the chains.
            let q = s.q();
            let mut lam = vec![cnum(rng)];
            let mut chained = vec![false];
            for _ in 1..m {
                let link = rng.gen_bool(0.6);
                let prev = *lam.last().expect("nonempty");
                lam.push(if link { prev + q } else { cnum(rng) });
                chained.push(link);
            }
            let mut y1 = CMat::zeros(m, m);
            for k in 1..m {
                if chained[k] {
                    y1[(k - 1, k)] = cnum(rng);
                }
            }
            let pm = conditioned(rng, m);
            let pinv = pm
                .clone()
                .try_inverse()
                .ok_or_else(|| Error::Generation("singular P".into()))?;
            let y2 = &pm * CMat::from_diagonal(&nalgebra::DVector::from_vec(lam)) * &pinv;
            let y1 = &pm * y1 * &pinv;
            // Im tr Y₂ = (2σ − d' − c)/(2√2 δ') since tr Y₁ = 0
            let target = (2.0 * s.sigma - s.dp - s.c) / (2.0 * std::f64::consts::SQRT_2 * dl);
            let shift = (target - linalg::trace_c(&y2).im) / m as f64;
            (y1, y2 + CMat::identity(m, m) * (I * shift))
        }
        _ => {
            let pm = conditioned(rng, m);
            let pinv = pm
                .clone()
                .try_inverse()
                .ok_or_else(|| Error::Generation("singular P".into()))?;
            let d1 = nalgebra::DVector::from_fn(m, |_, _| cnum(rng));
            let d2 = nalgebra::DVector::from_fn(m, |_, _| cnum(rng));
            let mut y1 = &pm * CMat::from_diagonal(&d1) * &pinv;
            let mut y2 = &pm * CMat::from_diagonal(&d2) * &pinv;
            // tr Y₁ real and Im tr Y₂ = −(δ/δ') tr Y₁
            let id = CMat::identity(m, m);
            y1 -= &id * (I * (linalg::trace_c(&y1).im / m as f64));
            let target = -(s.delta / dl) * linalg::trace_c(&y1).re;
            y2 += &id * (I * ((target - linalg::trace_c(&y2).im) / m as f64));
            (y1, y2)
        }
    };
    p.y1 = y1;
    p.y2 = y2;
    if tag != CaseTag::AbR0 {
        let (e1, e2) = super::build::e_blocks(&s);
        let v2 = cmat(rng, m, 2);
        p.v1 = solve_v1(&p.y1, &p.y2, &e1, &e2, &v2, s.q())?;
        p.v2 = v2;
    }
    Ok(p)
}

/// Solves `V₁E₂ − (Y₂ + q)V₁ = V₂E₁ − Y₁V₂` for `V₁`.
fn solve_v1(y1: &CMat, y2: &CMat, e1: &CMat, e2: &CMat, v2: &CMat, q: Complex64) -> Result<CMat> {
    let m = y1.nrows();
    let id2 = CMat::identity(2, 2);
    let idm = CMat::identity(m, m);
    let shifted = y2 + &idm * q;
    let op = e2.transpose().kronecker(&idm) - id2.kronecker(&shifted);
    let rhs = v2 * e1 - y1 * v2;
    let rhs_vec = CMat::from_column_slice(2 * m, 1, rhs.as_slice());
    let x = linalg::lstsq_c(&op, &rhs_vec);
    let res = linalg::max_abs_c(&(&op * &x - &rhs_vec));
    let scale = linalg::max_abs_c(&rhs_vec).max(1.0);
    if res > 1e-11 * scale || linalg::max_abs_c(&x) > 1e3 {
        return Err(Error::Generation(format!(
            "V relation not solvable: {res:.3e}"
        )));
    }
    Ok(CMat::from_column_slice(m, 2, x.as_slice()))
}

/// New Hermitian metric `ω + ε (dγ)^{1,1}` for a random real 1-form `γ`, then re-extracts
/// the admissible frame and blocks.
fn perturb_metric(inst: &Codim2Instance, rng: &mut ChaCha8Rng) -> Result<Codim2Instance> {
    let n = inst.frame.n();
    let dop = Differential::new(&inst.frame);
    let mut gamma = InvariantForm::zero(n);
    for k in 0..n {
        let z = cnum(rng);
        gamma = gamma
            .add(&InvariantForm::phi(n, k).scale(z))
            .add(&InvariantForm::phibar(n, k).scale(z.conj()));
    }
    let dg = dop.apply(&gamma)?;
    let cm = CMat::from_fn(n, n, |i, j| dg.coefficient(&[i], &[j]));
    let k = cm * (-I);
    let (eig, _) = linalg::hermitian_eigh(&((&k + k.adjoint()) * cr(0.5)));
    let knorm = eig.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    if knorm < 1e-6 {
        // abelian algebra: every invariant metric is already Kähler
        return Ok(inst.clone());
    }
    let eps = uniform(rng, 0.2, 0.75) / knorm;
    let h = CMat::identity(n, n) + k * cr(eps);
    let l = h
        .cholesky()
        .ok_or_else(|| Error::Generation("perturbed metric not positive".into()))?
        .l();
    let w = l
        .try_inverse()
        .ok_or_else(|| Error::Generation("singular Cholesky factor".into()))?;
    let moved = inst.frame.transform(&w)?;
    let g = HermitianMetric::new(moved.metric(), &inst.j)?;
    let af = admissible_frame(&inst.alg, &inst.ideal, &inst.j, &g)?;
    let params = Codim2Params {
        n,
        case_tag: inst.params.case_tag,
        scalars: af.scalars,
        v1: af.blocks.v1.clone(),
        v2: af.blocks.v2.clone(),
        y1: af.blocks.y1.clone(),
        y2: af.blocks.y2.clone(),
    };
    Ok(Codim2Instance {
        params,
        alg: inst.alg.clone(),
        j: inst.j.clone(),
        g,
        ideal: inst.ideal.clone(),
        frame: af.frame,
        blocks: af.blocks,
    })
}

/// The same instance in a random real basis `P` (condition number at most 10):
/// coordinates become `P⁻¹v`, `J ↦ P⁻¹JP`, `g ↦ PᵀgP`.
pub fn random_basis_change<R: Rng>(inst: &Codim2Instance, rng: &mut R) -> Result<Codim2Instance> {
    let dim = inst.alg.dim();
    let gauss = |rng: &mut R| RMat::from_fn(dim, dim, |_, _| rng.gen_range(-1.0..1.0));
    let q1 = gauss(rng).qr().q();
    let q2 = gauss(rng).qr().q();
    let s = RMat::from_diagonal(&nalgebra::DVector::from_fn(dim, |_, _| {
        rng.gen_range(0.5..5.0)
    }));
    let p = q1 * s * q2;
    let pinv = p
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::Generation("singular basis change".into()))?;
    let alg = inst.alg.change_basis(&p)?;
    let j = ComplexStructure::new(&pinv * inst.j.matrix() * &p)?;
    let g = HermitianMetric::new(p.transpose() * inst.g.matrix() * &p, &j)?;
    let ideal = Subspace::new(&pinv * inst.ideal.basis())?;
    let e = linalg::to_complex(&pinv) * inst.frame.vectors();
    let frame = UnitaryFrame::from_vectors(&alg, &j, e)?;
    Ok(Codim2Instance {
        params: inst.params.clone(),
        alg,
        j,
        g,
        ideal,
        frame,
        blocks: inst.blocks.clone(),
    })
}
