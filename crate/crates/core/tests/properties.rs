//! Property tests for the library invariants.

use jmoment::cli::format::{
    self, ConjugationFileV1, MatrixFileV1, MomentFileV1, OperatorFileV1, SolutionDocument,
    SolutionFileV1,
};
use jmoment::construct::{build_space, refactor};
use jmoment::extend::{
    extend_selfadjoint, extend_skew, family_for_vectors, recover_parameter,
    unitary_extension_family, ExtensionInput,
};
use jmoment::jspace::{apply_j, j_form, pairwise_check, structure_check, Conjugation, ProblemKind};
use jmoment::linalg::{
    self, c, frobenius, inner, random_structured, vec_norm, CMat, CNum, CVec, StructureKind,
};
use jmoment::moments::{feasibility, MomentProblem, DEFAULT_MOMENT_TOL};
use jmoment::solver::{generate_instance, solve, Classification, SolveOptions};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

fn random_matrix(rows: usize, cols: usize, seed: u64) -> CMat {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    CMat::from_fn(rows, cols, |_, _| {
        c(
            StandardNormal.sample(&mut rng),
            StandardNormal.sample(&mut rng),
        )
    })
}

fn random_vector(n: usize, seed: u64) -> CVec {
    random_matrix(n, 1, seed).column(0).into_owned()
}

fn kind_strategy() -> impl Strategy<Value = ProblemKind> {
    prop_oneof![
        Just(ProblemKind::A),
        Just(ProblemKind::B),
        Just(ProblemKind::C)
    ]
}

fn structure_of(kind: ProblemKind) -> StructureKind {
    match kind {
        ProblemKind::A => StructureKind::Symmetric,
        ProblemKind::B => StructureKind::Skew,
        ProblemKind::C => StructureKind::ComplexOrthogonal,
    }
}

fn finite() -> impl Strategy<Value = f64> {
    prop_oneof![
        -1e3..1e3f64,
        any::<f64>().prop_filter("finite", |x| x.is_finite()),
    ]
}

fn complex() -> impl Strategy<Value = CNum> {
    (finite(), finite()).prop_map(|(re, im)| c(re, im))
}

fn rows(n: usize, m: usize) -> impl Strategy<Value = Vec<Vec<CNum>>> {
    prop::collection::vec(prop::collection::vec(complex(), m), n)
}

// 64 cases per property unless PROPTEST_CASES asks for more.
fn config() -> ProptestConfig {
    let cases = std::env::var("PROPTEST_CASES")
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or(64);
    ProptestConfig::with_cases(cases)
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn pseudoinverse_penrose(rows in 1usize..7, cols in 1usize..7, r in 1usize..7, seed in any::<u64>()) {
        let r = r.min(rows).min(cols);
        let m = random_matrix(rows, r, seed) * random_matrix(r, cols, seed ^ 1);
        let p = linalg::pseudoinverse(&m, 0.0).unwrap();
        let scale = frobenius(&m).max(1.0) * frobenius(&p).max(1.0);
        let mp = &m * &p;
        let pm = &p * &m;
        prop_assert!(frobenius(&(&mp * &m - &m)) <= 1e-10 * scale * frobenius(&m).max(1.0));
        prop_assert!(frobenius(&(&pm * &p - &p)) <= 1e-10 * scale * frobenius(&p).max(1.0));
        prop_assert!(frobenius(&(&mp - mp.adjoint())) <= 1e-10 * scale);
        prop_assert!(frobenius(&(&pm - pm.adjoint())) <= 1e-10 * scale);
    }

    #[test]
    fn rank_plus_nullity(rows in 0usize..7, cols in 0usize..7, r in 0usize..7, seed in any::<u64>()) {
        let r = r.min(rows).min(cols);
        let m = random_matrix(rows, r, seed) * random_matrix(r, cols, seed ^ 2);
        let (rank, null) = linalg::rank_nullspace(&m, 0.0).unwrap();
        prop_assert_eq!(rank + null.ncols(), cols);
        prop_assert_eq!(rank, r);
    }

    #[test]
    fn projector_is_orthogonal(n in 1usize..8, k in 0usize..8, seed in any::<u64>()) {
        let k = k.min(n);
        let basis = random_matrix(n, k, seed);
        let p = linalg::projector(&basis).unwrap();
        prop_assert!(frobenius(&(&p * &p - &p)) <= 1e-12);
        prop_assert!(frobenius(&(&p - p.adjoint())) <= 1e-12);
        prop_assert!(frobenius(&(&p * &basis - &basis)) <= 1e-10 * frobenius(&basis).max(1.0));
    }

    #[test]
    fn takagi_factorizes(n in 1usize..13, rank in 0usize..13, seed in any::<u64>()) {
        let r = rank.min(n);
        let f = random_matrix(n, r, seed);
        let gamma = &f * f.transpose();
        let t = linalg::takagi(&gamma, 0.0).unwrap();
        let scale = frobenius(&gamma).max(1.0);
        prop_assert!(frobenius(&(&t.lambda * t.lambda.transpose() - &gamma)) <= 1e-10 * scale);
        prop_assert!(t.rank <= r);
    }

    #[test]
    fn conjugation_invariants(n in 1usize..7, seed in any::<u64>(), s1 in any::<u64>(), s2 in any::<u64>()) {
        let j = Conjugation::random(n, seed);
        let cm = j.matrix();
        prop_assert!(frobenius(&(cm - cm.transpose())) <= 1e-12);
        prop_assert!(frobenius(&(cm.adjoint() * cm - CMat::identity(n, n))) <= 1e-12);
        let x = random_vector(n, s1);
        let y = random_vector(n, s2);
        let jx = apply_j(&j, &x).unwrap();
        let jy = apply_j(&j, &y).unwrap();
        // involution and anti-isometry
        prop_assert!(vec_norm(&(apply_j(&j, &jx).unwrap() - &x)) <= 1e-12 * (1.0 + vec_norm(&x)));
        prop_assert!((inner(&jx, &jy) - inner(&y, &x)).norm() <= 1e-12 * (1.0 + vec_norm(&x) * vec_norm(&y)));
        // the form is symmetric and bilinear
        prop_assert!((j_form(&j, &x, &y).unwrap() - j_form(&j, &y, &x).unwrap()).norm() <= 1e-12 * (1.0 + vec_norm(&x) * vec_norm(&y)));
        let z = c(0.3, -1.7);
        let scaled: CVec = &x * z;
        prop_assert!((j_form(&j, &scaled, &y).unwrap() - j_form(&j, &x, &y).unwrap() * z).norm() <= 1e-12 * (1.0 + vec_norm(&x) * vec_norm(&y)));
    }

    #[test]
    fn j_unitary_is_invertible(n in 1usize..7, seed in any::<u64>()) {
        let j = Conjugation::random(n, seed);
        let u = linalg::takagi(j.matrix(), 0.0).unwrap().unitary;
        let w = &u * random_structured(StructureKind::ComplexOrthogonal, n, seed ^ 3) * u.adjoint();
        prop_assert!(structure_check(&j, &w, ProblemKind::C, 1e-9).unwrap());
        prop_assert!(linalg::sigma_min(&w).unwrap() > 0.0);
    }

    #[test]
    fn canonical_kind_a_is_transpose_symmetry(n in 1usize..7, seed in any::<u64>(), symmetric in any::<bool>()) {
        let m = random_matrix(n, n, seed);
        let a = if symmetric { (&m + m.transpose()).scale(0.5) } else { m };
        let direct = frobenius(&(&a - a.transpose())) <= 1e-9 * (1.0 + frobenius(&a));
        prop_assert_eq!(structure_check(&Conjugation::canonical(n), &a, ProblemKind::A, 1e-9).unwrap(), direct);
    }

    #[test]
    fn generated_moments_pass_feasibility(kind in kind_strategy(), n in 2usize..7, d in 1usize..5, seed in any::<u64>()) {
        let d = d.min(n - 1);
        let inst = generate_instance(kind, n, d, seed).unwrap();
        let report = feasibility(&inst.problem(), None, DEFAULT_MOMENT_TOL).unwrap();
        prop_assert!(report.is_solvable(), "{:?}", report.verdict);
    }

    #[test]
    fn model_space_reproduces_moments(kind in kind_strategy(), n in 2usize..7, d in 1usize..5, seed in any::<u64>()) {
        let d = d.min(n - 1);
        let inst = generate_instance(kind, n, d, seed).unwrap();
        let lambda = linalg::takagi(&inst.gamma, 0.0).unwrap().truncated_lambda();
        let space = build_space(&lambda, &inst.gamma, DEFAULT_MOMENT_TOL).unwrap();
        let forms = space.conj.form_matrix(&space.x, &space.x).unwrap();
        prop_assert!(frobenius(&(forms - &inst.gamma)) <= 1e-9 * frobenius(&inst.gamma).max(1.0));
        prop_assert!(pairwise_check(&space.conj, &space.a0, &space.domain_basis, kind, 1e-9).unwrap());
        if linalg::sigma_min(&inst.gamma).unwrap() > 1e-6 {
            prop_assert_eq!(space.defect(), 1);
            prop_assert!(linalg::sigma_min(&(&space.a0 * &space.domain_basis)).unwrap() > 1e-10);
        }
    }

    #[test]
    fn refactor_keeps_gamma(n in 1usize..6, seed in any::<u64>()) {
        let lambda = random_matrix(n + 1, n, seed);
        let o = random_structured(StructureKind::ComplexOrthogonal, n, seed ^ 4);
        let r = refactor(&lambda, &o, 1e-10).unwrap();
        let g = &lambda * lambda.transpose();
        prop_assert!(frobenius(&(&r * r.transpose() - &g)) <= 1e-10 * frobenius(&g).max(1.0));
    }

    #[test]
    fn symmetric_and_skew_extensions(n in 2usize..9, k in 1usize..8, seed in any::<u64>(), skew in any::<bool>(), generic in any::<bool>()) {
        let k = k.min(n - 1);
        let kind = if skew { ProblemKind::B } else { ProblemKind::A };
        let j = if generic { Conjugation::random(n, seed) } else { Conjugation::canonical(n) };
        let basis = linalg::random_unitary(n, seed ^ 5);
        let domain = basis.columns(0, k).into_owned();
        let complement = basis.columns(k, n - k).into_owned();
        let p1 = &domain * domain.adjoint();
        let m = random_structured(structure_of(kind), n, seed ^ 6);
        let n_matrix = j.matrix() * m * &p1;
        let t = random_structured(structure_of(kind), n - k, seed ^ 7);
        let s = j.matrix() * complement.map(|z| z.conj()) * t * complement.adjoint();
        let inp = ExtensionInput::new(n_matrix.clone(), p1, j.clone()).unwrap();
        let ext = if skew { extend_skew(&inp, Some(&s)) } else { extend_selfadjoint(&inp, Some(&s)) }.unwrap();
        let base = if skew { extend_skew(&inp, None) } else { extend_selfadjoint(&inp, None) }.unwrap();
        prop_assert!(structure_check(&j, &ext, kind, 1e-9).unwrap());
        for h in domain.column_iter() {
            let diff = &ext * h - &n_matrix * h;
            prop_assert!(vec_norm(&diff) <= 1e-9 * (1.0 + frobenius(&n_matrix)) * h.norm());
        }
        let back = recover_parameter(&inp, &ext, kind).unwrap();
        prop_assert!(frobenius(&(back - &s)) <= 1e-10 * (1.0 + frobenius(&s)));
        if frobenius(&s) > 1e-6 {
            prop_assert!(frobenius(&(ext - base)) > 0.0);
        }
    }

    #[test]
    fn unitary_family_consistency(n in 2usize..8, seed in any::<u64>(), theta in 0.0..std::f64::consts::TAU) {
        let j = Conjugation::random(n, seed);
        let u = linalg::takagi(j.matrix(), 0.0).unwrap().unitary;
        let w0 = &u * random_structured(StructureKind::ComplexOrthogonal, n, seed ^ 8) * u.adjoint();
        let basis = linalg::random_unitary(n, seed ^ 9);
        let domain = basis.columns(0, n - 1).into_owned();
        let p1 = &domain * domain.adjoint();
        let inp = ExtensionInput::new(&w0 * &p1, p1, j.clone()).unwrap();
        let family = unitary_extension_family(&inp, 1e-9).unwrap();
        prop_assert_eq!(family.roots, linalg::solve_quadratic(family.a, family.b, family.c));
        let id = CMat::identity(n, n);
        let base_forms = j.form_matrix(&id, &id).unwrap();
        for w in family.representatives() {
            let forms = j.form_matrix(&w, &w).unwrap();
            prop_assert!(frobenius(&(forms - &base_forms)) <= 1e-9 * (1.0 + frobenius(&w)).powi(2));
            prop_assert!(frobenius(&(&w * &domain - &w0 * &domain)) <= 1e-9 * (1.0 + frobenius(&w0)));
        }
        let phase = c(theta.cos(), theta.sin());
        let phased = family_for_vectors(&inp, &family.u * phase, family.v.clone(), 1e-9).unwrap();
        let a = family.representatives();
        let b = phased.representatives();
        prop_assert_eq!(a.len(), b.len());
        for w in &b {
            prop_assert!(a.iter().any(|x| frobenius(&(x - w)) <= 1e-9 * (1.0 + frobenius(x))));
        }
    }

    #[test]
    fn round_trip_and_determinism(kind in kind_strategy(), n in 2usize..7, d in 1usize..5, seed in any::<u64>()) {
        let d = d.min(n - 1);
        let inst = generate_instance(kind, n, d, seed).unwrap();
        let opts = SolveOptions::default();
        let s = solve(&inst.problem(), &opts).unwrap();
        prop_assert!(s.report.passed, "{:?}", s.report);
        prop_assert!(s.report.max_moment_error <= 1e-8);
        if kind != ProblemKind::C {
            prop_assert_ne!(s.classification, Classification::Neither);
        }
        let again = solve(&inst.problem(), &opts).unwrap();
        let first = format::to_json(&SolutionFileV1::from_solution(&s));
        let second = format::to_json(&SolutionFileV1::from_solution(&again));
        prop_assert_eq!(first, second);
    }

    #[test]
    fn moment_file_round_trip(d in 1usize..5, kind in kind_strategy(), entries in rows(5, 5)) {
        let gamma = CMat::from_fn(d + 1, d + 1, |i, j| entries[i][j]);
        let file = MomentFileV1::from_problem(&MomentProblem::new(kind, gamma).unwrap());
        let back: MomentFileV1 = format::parse(&format::to_json(&file), "m").unwrap();
        prop_assert_eq!(&back, &file);
        let p = back.to_problem("m").unwrap();
        prop_assert_eq!(MomentFileV1::from_problem(&p), file);
    }

    #[test]
    fn matrix_and_operator_round_trip(m in rows(3, 2), p in rows(3, 3)) {
        let file = MatrixFileV1 { schema: format::MATRIX_SCHEMA.into(), matrix: m };
        let back: MatrixFileV1 = format::parse(&format::to_json(&file), "m").unwrap();
        prop_assert_eq!(back, file);
        let op = OperatorFileV1 {
            schema: format::OPERATOR_SCHEMA.into(),
            operator: p.clone(),
            domain_projector: Some(p),
            domain_basis: None,
            conjugation: None,
        };
        let back: OperatorFileV1 = format::parse(&format::to_json(&op), "o").unwrap();
        prop_assert_eq!(back, op);
    }

    #[test]
    fn solution_and_conjugation_round_trip(kind in kind_strategy(), n in 2usize..6, d in 1usize..5, seed in any::<u64>()) {
        let d = d.min(n - 1);
        let inst = generate_instance(kind, n, d, seed).unwrap();
        let s = solve(&inst.problem(), &SolveOptions::default()).unwrap();
        let doc = SolutionDocument::Many(vec![SolutionFileV1::from_solution(&s)]);
        let back: SolutionDocument = format::parse(&format::to_json(&doc), "s").unwrap();
        prop_assert_eq!(&back, &doc);
        let parts = back.entries()[0].parts("s").unwrap();
        prop_assert_eq!(parts.a, s.a);
        prop_assert_eq!(parts.x0, s.x0);
        let conj = ConjugationFileV1::new(&Conjugation::random(n, seed));
        let back: ConjugationFileV1 = format::parse(&format::to_json(&conj), "c").unwrap();
        prop_assert_eq!(&back, &conj);
        prop_assert!(back.to_conjugation("c", n).is_ok());
    }
}
