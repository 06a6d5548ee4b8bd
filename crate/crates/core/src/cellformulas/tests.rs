use super::*;
use crate::densities::{ComponentSpec, DensitySpec};

fn densities(w: &str, psi1: &str, psi2: &str, d: usize, n: usize) -> DensityTriple {
    DensitySpec {
        w: Some(ComponentSpec::catalog(w)),
        psi1: Some(ComponentSpec::catalog(psi1)),
        psi2: Some(ComponentSpec::catalog(psi2)),
    }
    .build(d, n)
    .unwrap()
}

fn norms(d: usize, n: usize) -> DensityTriple {
    densities("w_norm", "psi1_norm", "psi2_norm", d, n)
}

fn example_densities() -> DensityTriple {
    densities("w_zero", "psi1_norm", "psi2_proj", 2, 2)
}

fn cfg() -> SearchConfig {
    SearchConfig::default()
}

#[test]
fn w1_zero_gradient() {
    let r = estimate_w1(&CellProblem::w1(vec![0.0, 0.0], vec![0.0; 4], 2), &norms(2, 2), &cfg()).unwrap();
    assert_eq!(r.upper, 0.0);
    assert_eq!(r.lower, Some(0.0));
}

#[test]
fn w1_single_column_is_certified() {
    let r = estimate_w1(&CellProblem::w1(vec![0.0, 0.0], vec![1.0, 0.0, 0.0, 0.0], 2), &norms(2, 2), &cfg()).unwrap();
    assert!((r.upper - 1.0).abs() < 1e-12);
    assert_eq!(r.lower, Some(1.0));
    assert_eq!(r.best.family, "staircase");
}

#[test]
fn w1_identity_has_gap() {
    let r = estimate_w1(&CellProblem::w1(vec![0.0, 0.0], vec![1.0, 0.0, 0.0, 1.0], 2), &norms(2, 2), &cfg()).unwrap();
    assert!((r.upper - 2.0).abs() < 1e-12);
    assert!((r.lower.unwrap() - 2f64.sqrt()).abs() < 1e-15);
    assert!((r.gap().unwrap() - (2.0 - 2f64.sqrt())).abs() < 1e-12);
}

#[test]
fn gamma1_cases() {
    let d = norms(2, 2);
    let zero =
        estimate_gamma1(&CellProblem::gamma1(vec![0.0, 0.0], vec![0.0, 0.0], vec![0.0, 1.0]), &d, &cfg()).unwrap();
    assert_eq!(zero.upper, 0.0);
    for nu in [vec![0.0, 1.0], vec![0.6, 0.8], vec![-1.0, 0.0]] {
        let r = estimate_gamma1(&CellProblem::gamma1(vec![0.0, 0.0], vec![3.0, 4.0], nu), &d, &cfg()).unwrap();
        assert!((r.upper - 5.0).abs() < 1e-12, "{}", r.upper);
        assert_eq!(r.lower, Some(5.0));
    }
}

#[test]
fn gamma1_weight_frozen_at_the_point() {
    let d = densities("w_norm", "psi1_weighted", "psi2_norm", 2, 2);
    let r = estimate_gamma1(&CellProblem::gamma1(vec![0.5, 0.1], vec![3.0, 4.0], vec![1.0, 0.0]), &d, &cfg()).unwrap();
    assert!((r.upper - 2.5).abs() < 1e-12);
    assert!((r.lower.unwrap() - 2.5).abs() < 1e-12);
}

#[test]
fn w2_trivial_competitors() {
    let d = norms(1, 2);
    let a = vec![3.0, 4.0];
    let r =
        estimate_w2(&CellProblem::w2(vec![0.0, 0.0], a.clone(), vec![0.0; 4], vec![0.0; 4], 1), &d, &cfg()).unwrap();
    assert!(r.upper <= 5.0 + 1e-12);
    assert_eq!(r.lower, Some(0.0));
    let l = vec![1.0, 0.5, 0.5, -2.0];
    let r = estimate_w2(&CellProblem::w2(vec![0.0, 0.0], a.clone(), l.clone(), l.clone(), 1), &d, &cfg()).unwrap();
    assert!(r.upper <= d.w(&[0.0, 0.0], &a, &l) + 1e-12);
}

#[test]
fn w2_example_inclusion_reaches_closed_form() {
    let mut m = vec![0.0; 8];
    m[0] = 1.0;
    m[6] = 1.0;
    let p = CellProblem::w2(vec![0.0, 0.0], vec![0.0; 4], vec![0.0; 8], m, 2);
    let sweep = estimate(&p, &example_densities(), &cfg()).unwrap();
    assert!((sweep.result.upper - 2.0).abs() < 1e-9, "{}", sweep.result.upper);
    assert!(sweep.rows.iter().filter(|r| r.admissible).all(|r| r.energy >= 2.0 - 1e-9));
    // affine is not admissible since M ≠ L
    assert!(sweep.rows.iter().any(|r| r.family == "affine" && !r.admissible));
}

#[test]
fn gamma2_cases() {
    let d = densities("w_zero", "psi1_norm", "psi2_norm", 2, 2);
    let i2 = vec![1.0, 0.0, 0.0, 1.0];
    let zero =
        estimate_gamma2(&CellProblem::gamma2(vec![0.0; 2], i2.clone(), vec![0.0; 4], vec![1.0, 0.0], 2), &d, &cfg());
    assert_eq!(zero.unwrap().upper, 0.0);
    let r =
        estimate_gamma2(&CellProblem::gamma2(vec![0.0; 2], vec![0.0; 4], i2.clone(), vec![0.0, 1.0], 2), &d, &cfg())
            .unwrap();
    assert!((r.upper - 2f64.sqrt()).abs() < 1e-12);
    assert!((r.lower.unwrap() - 2f64.sqrt()).abs() < 1e-15);
    let r = estimate_gamma2(
        &CellProblem::gamma2(vec![0.0; 2], vec![0.0; 4], i2, vec![1.0, 0.0], 2),
        &example_densities(),
        &cfg(),
    )
    .unwrap();
    assert!(r.upper <= 1.0 + 1e-12);
    assert!(r.lower.is_none());
}

#[test]
fn every_counted_competitor_is_admissible() {
    let p = CellProblem::gamma2(vec![0.0; 2], vec![1.0, 0.0, 0.0, 1.0], vec![1.0, 2.0, 0.0, -1.0], vec![0.6, 0.8], 2);
    let d = norms(2, 2);
    let sweep = estimate(&p, &d, &cfg()).unwrap();
    for fam in Family::for_variant(&p.variant) {
        for row in sweep.rows.iter().filter(|r| r.family == fam.name()) {
            let c = fam.build(&p, cfg().resolution, &row.params).unwrap();
            let e = c.evaluate(&p, &d);
            assert_eq!(e.admissible, row.admissible);
            if row.admissible {
                assert!(e.trace_error <= ADMISSIBILITY_TOLERANCE && e.gradient_error <= ADMISSIBILITY_TOLERANCE);
            }
        }
    }
    assert!(sweep.rows.iter().filter(|r| r.admissible).count() > 10);
}

#[test]
fn rejects_bad_problems() {
    let d = norms(2, 2);
    assert!(estimate(&CellProblem::gamma1(vec![0.0; 2], vec![1.0, 0.0], vec![1.0, 1.0]), &d, &cfg()).is_err());
    assert!(estimate(&CellProblem::w1(vec![0.0; 2], vec![1.0], 2), &d, &cfg()).is_err());
    let bad = SearchConfig { budget: 0, ..cfg() };
    assert!(estimate(&CellProblem::w1(vec![0.0; 2], vec![0.0; 4], 2), &d, &bad).is_err());
    let wrong = SearchConfig { families: Some(vec!["inclusion".into()]), ..cfg() };
    assert!(estimate(&CellProblem::w1(vec![0.0; 2], vec![0.0; 4], 2), &d, &wrong).is_err());
}

#[test]
fn csv_layout() {
    let d = norms(2, 2);
    let sweep = estimate(&CellProblem::gamma1(vec![0.0; 2], vec![1.0, 0.0], vec![0.0, 1.0]), &d, &cfg()).unwrap();
    let mut buf = Vec::new();
    sweep.write_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "family,param1,param2,param3,admissible,energy");
    assert!(lines.next().unwrap().starts_with("name,scalar"));
    assert_eq!(lines.count(), sweep.rows.len());
}
