mod common;

use hermlie::codim2_models::{generate_with, CaseTag, GeneratorOptions};
use hermlie::complex_frames::{
    jacobi_cd_residuals, torsion_tensor, verify_jacobi_cd, CTensor, Differential, InvariantForm,
    UnitaryFrame,
};
use hermlie::linalg::{c, CMat, I};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn any_tag() -> impl Strategy<Value = CaseTag> {
    prop::sample::select(CaseTag::CONSTRUCTIBLE.to_vec())
}

fn instance_frame(tag: CaseTag, n: usize, seed: u64, bc: bool) -> UnitaryFrame {
    let n = if tag == CaseTag::NaGeneric {
        n.max(3)
    } else {
        n
    };
    let opts = GeneratorOptions {
        basis_change: bc,
        ..GeneratorOptions::default()
    };
    generate_with(tag, n, seed, opts).unwrap().frame
}

fn random_unitary(n: usize, rng: &mut ChaCha8Rng) -> CMat {
    let z = CMat::from_fn(n, n, |_, _| {
        c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    });
    z.qr().q()
}

fn d_squared(d: &Differential, n: usize) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for f in [InvariantForm::phi(n, i), InvariantForm::phibar(n, i)] {
            let once = d.apply(&f).unwrap();
            worst = worst.max(d.apply(&once).unwrap().norm());
        }
    }
    worst
}

fn torsion_identity(frame: &UnitaryFrame) -> f64 {
    let n = frame.n();
    let t = torsion_tensor(frame);
    let mut rhs = InvariantForm::zero(n);
    for j in 0..n {
        for i in 0..n {
            for k in (i + 1)..n {
                rhs = rhs
                    .add(&InvariantForm::monomial(n, &[i, k], &[j], I * t.get(j, i, k)).unwrap());
            }
        }
    }
    let d_omega = Differential::new(frame)
        .apply(&InvariantForm::kahler(n))
        .unwrap();
    d_omega.component(2, 1).sub(&rhs).norm()
}

fn perturbed(t: &CTensor, eps: f64, rng: &mut ChaCha8Rng) -> CTensor {
    let n = t.n();
    let mut out = t.clone();
    for a in 0..n {
        for b in 0..n {
            for k in 0..n {
                let z = t.get(a, b, k) + c(rng.gen_range(-eps..eps), rng.gen_range(-eps..eps));
                out.set(a, b, k, z);
            }
        }
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn d_squared_vanishes_with_jacobi(tag in any_tag(), n in 2usize..=4, seed in 0u64..5000) {
        let frame = instance_frame(tag, n, seed, false);
        let n = frame.n();
        let jac = verify_jacobi_cd(&frame);
        let dd = d_squared(&Differential::new(&frame), n);
        prop_assert!(jac.iter().all(|r| *r <= 1e-10) && dd <= 1e-10, "jacobi {:?}, d² {}", jac, dd);

        // break the identities on purpose: both sides must notice
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c_bad = perturbed(frame.c(), 0.3, &mut rng);
        let d_bad = perturbed(frame.d(), 0.3, &mut rng);
        let jac_bad = jacobi_cd_residuals(&c_bad, &d_bad);
        let dd_bad = d_squared(&Differential::from_tensors(&c_bad, &d_bad), n);
        let jac_fails = jac_bad.iter().any(|r| *r > 1e-8);
        prop_assert_eq!(jac_fails, dd_bad > 1e-8, "jacobi {:?}, d² {}", jac_bad, dd_bad);
    }

    #[test]
    fn torsion_identity_holds(tag in any_tag(), n in 2usize..=5, seed in 0u64..5000, bc in any::<bool>()) {
        let frame = instance_frame(tag, n, seed, bc);
        let r = torsion_identity(&frame);
        prop_assert!(r <= 1e-10, "{}", r);
    }

    #[test]
    fn unitary_change_keeps_residuals(tag in any_tag(), n in 2usize..=4, seed in 0u64..5000) {
        let frame = instance_frame(tag, n, seed, false);
        let n = frame.n();
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
        let w = random_unitary(n, &mut rng);
        let moved = frame.transform(&w).unwrap();
        prop_assert!(moved.unitarity_residual(&frame.metric()) <= 1e-12);
        let ja = verify_jacobi_cd(&frame);
        let jb = verify_jacobi_cd(&moved);
        for (a, b) in ja.iter().zip(jb.iter()) {
            prop_assert!((a - b).abs() <= 1e-10);
        }
        let om = InvariantForm::kahler(n);
        let da = Differential::new(&frame).apply(&om).unwrap();
        let db = Differential::new(&moved).apply(&om).unwrap();
        for (p, q) in [(2, 1), (1, 2), (3, 0), (0, 3)] {
            let (x, y) = (da.component(p, q).norm(), db.component(p, q).norm());
            prop_assert!((x - y).abs() <= 1e-10, "({},{}) {} vs {}", p, q, x, y);
        }
        prop_assert!(torsion_identity(&moved) <= 1e-10);
    }
}

#[test]
fn kahler_form_is_real() {
    let om = InvariantForm::kahler(3);
    let diff = om.sub(&om.conj());
    assert!(diff.norm() < 1e-15);
    assert_eq!(om.coefficient(&[1], &[1]), Complex64::new(0.0, 1.0));
}
