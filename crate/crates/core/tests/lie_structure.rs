mod common;

use hermlie::codim2_models::{generate_with, CaseTag, GeneratorOptions};
use hermlie::complex_frames::{unimodularity_residual_cd, ComplexStructure, UnitaryFrame};
use hermlie::lie_core::{
    derived_series, is_unimodular, validate_structure_constants, verify_abelian_ideal,
    RealLieAlgebra,
};
use hermlie::linalg::{self, RMat};
use proptest::prelude::*;

use common::derived_dims;

fn any_tag() -> impl Strategy<Value = CaseTag> {
    prop::sample::select(CaseTag::CONSTRUCTIBLE.to_vec())
}

/// `alg ⊕ span{u, w}` with `[u, w] = αu + βw`, `J` extended by `Ju = w`.
fn with_plane(
    alg: &RealLieAlgebra,
    j: &RMat,
    alpha: f64,
    beta: f64,
) -> (RealLieAlgebra, ComplexStructure) {
    let d = alg.dim();
    let mut out = RealLieAlgebra::abelian(d + 2);
    for k in 0..d {
        for a in 0..d {
            for b in 0..d {
                out.set(k, a, b, alg.get(k, a, b));
            }
        }
    }
    out = out.with_bracket(d, d + 1, &[(d, alpha), (d + 1, beta)]);
    let mut jj = RMat::zeros(d + 2, d + 2);
    jj.view_mut((0, 0), (d, d)).copy_from(j);
    jj[(d + 1, d)] = 1.0;
    jj[(d, d + 1)] = -1.0;
    (out, ComplexStructure::new(jj).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn generator_outputs_are_lie_algebras(tag in any_tag(), n in 2usize..=5, seed in 0u64..10_000, bc in any::<bool>()) {
        prop_assume!(!(n == 2 && tag == CaseTag::NaGeneric));
        let opts = GeneratorOptions { basis_change: bc, ..GeneratorOptions::default() };
        let inst = generate_with(tag, n, seed, opts).unwrap();
        let rep = validate_structure_constants(&inst.alg, 1e-12).unwrap();
        prop_assert!(rep.pass, "{:?}", rep);
        let ideal = verify_abelian_ideal(&inst.alg, &inst.ideal, 1e-10 * inst.alg.scale()).unwrap();
        prop_assert!(ideal.is_ideal && ideal.is_abelian, "{:?}", ideal);
        let series = derived_series(&inst.alg, 1e-10);
        prop_assert!(matches!(series.step, Some(k) if k <= 3), "{:?}", series);
        prop_assert_eq!(series.dims, derived_dims(&inst.alg, 1e-10));
    }

    #[test]
    fn unimodularity_matches_frame_criterion(
        tag in any_tag(),
        seed in 0u64..1000,
        alpha in prop_oneof![Just(0.0), -2.0..2.0f64],
        beta in prop_oneof![Just(0.0), -2.0..2.0f64],
    ) {
        let n = 3;
        let inst = generate_with(tag, n, seed, GeneratorOptions::default()).unwrap();
        let (alg, j) = with_plane(&inst.alg, inst.j.matrix(), alpha, beta);
        let mut e = hermlie::linalg::CMat::zeros(2 * n + 2, n + 1);
        e.view_mut((0, 0), (2 * n, n)).copy_from(inst.frame.vectors());
        e[(2 * n, n)] = linalg::cr(std::f64::consts::FRAC_1_SQRT_2);
        e[(2 * n + 1, n)] = linalg::c(0.0, -std::f64::consts::FRAC_1_SQRT_2);
        let frame = UnitaryFrame::from_vectors(&alg, &j, e).unwrap();
        let real = is_unimodular(&alg, 1e-10);
        let cd = unimodularity_residual_cd(&frame);
        prop_assert_eq!(real.flag, cd <= 1e-10, "real {:?} cd {}", real, cd);
        prop_assert_eq!(real.flag, alpha == 0.0 && beta == 0.0);
    }
}

#[test]
fn non_unimodular_plane_is_detected() {
    let alg = RealLieAlgebra::abelian(2).with_bracket(0, 1, &[(1, 1.0)]);
    let rep = is_unimodular(&alg, 1e-12);
    assert!(!rep.flag);
    assert!((rep.residual - 1.0).abs() < 1e-15);
}
