//! Property tests of the invariants each module promises.

use proptest::prelude::*;
use sdrelax::assembly::{assemble_relaxed_energy, AssemblyConfig};
use sdrelax::cellformulas::{estimate_gamma1, estimate_w1, estimate_w2, CellProblem, SearchConfig};
use sdrelax::constructions::{approximating_sequence, staircase, CorrectionGrid, Sd2Triple};
use sdrelax::densities::{extend_homogeneous, ComponentSpec, DensitySpec, DensityTriple};
use sdrelax::energy::total_energy;
use sdrelax::example_tr::{closed_form_w2, example_densities, inclusion_energy, Bilinear3, BoxDescriptor};
use sdrelax::fields::{
    gauss_green_residual, BoundaryData, jump_set, total_jump_mass, BoxDomain, PiecewiseAffineField, PiecewiseConstantField,
    Sbv2Field, ValueShape,
};
use sdrelax::tensor::{column, norm};

fn catalog_triple(w: &str, p1: &str, p2: &str, d: usize, n: usize) -> DensityTriple {
    DensitySpec {
        w: Some(ComponentSpec::catalog(w)),
        psi1: Some(ComponentSpec::catalog(p1)),
        psi2: Some(ComponentSpec::catalog(p2)),
    }
    .build(d, n)
    .unwrap()
}

fn norms(d: usize, n: usize) -> DensityTriple {
    catalog_triple("w_norm", "psi1_norm", "psi2_norm", d, n)
}

fn entries(len: usize, range: f64) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-range..range, len)
}

fn unit_vector(n: usize) -> impl Strategy<Value = Vec<f64>> {
    entries(n, 1.0).prop_filter_map("too short", |v| {
        let r = norm(&v);
        (r > 0.1).then(|| v.iter().map(|x| x / r).collect())
    })
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    norm(&a.iter().zip(b).map(|(x, y)| x - y).collect::<Vec<_>>())
}

/// Quadratic pieces on `[0, 1]²`, one per (x band, y row) where the x bands
/// are `[0, ¼)`, `[¼, ¾)`, `[¾, 1]`. Nothing jumps across `x = ½`.
#[derive(Debug, Clone)]
struct Pieces {
    polys: Vec<(f64, [f64; 2], [f64; 3])>,
}

impl Pieces {
    fn strategy() -> impl Strategy<Value = Self> {
        prop::collection::vec((-2.0..2.0, [-2.0..2.0, -2.0..2.0], [-2.0..2.0, -2.0..2.0, -2.0..2.0]), 12)
            .prop_map(|polys| Pieces { polys })
    }

    fn field(&self, domain: BoxDomain) -> Sbv2Field {
        let (mut value, mut gradient, mut hessian) = (Vec::new(), Vec::new(), Vec::new());
        for cell in 0..domain.n_cells() {
            let c = domain.cell_center(cell);
            let band = if c[0] < 0.25 {
                0
            } else if c[0] < 0.75 {
                1
            } else {
                2
            };
            let row = ((c[1] * 4.0) as usize).min(3);
            let (k, g, h) = self.polys[band * 4 + row];
            let hc = [h[0] * c[0] + h[1] * c[1], h[1] * c[0] + h[2] * c[1]];
            value.push(k + g[0] * c[0] + g[1] * c[1] + 0.5 * (c[0] * hc[0] + c[1] * hc[1]));
            gradient.extend([g[0] + hc[0], g[1] + hc[1]]);
            hessian.extend([h[0], h[1], h[1], h[2]]);
        }
        Sbv2Field::new(domain, 1, value, gradient, hessian).unwrap()
    }
}

/// `g = A·y` with its own trace as boundary data, `G = B`, `Γ = 0`.
fn constant_sd2(a: &[f64], b: &[f64], d: usize, n: usize) -> Sd2Triple {
    let dom = BoxDomain::unit(n, 2);
    Sd2Triple::new(
        PiecewiseAffineField::global_affine(dom.clone(), &vec![0.0; d], a)
            .unwrap()
            .with_boundary(BoundaryData::Affine { constant: vec![0.0; d], slope: a.to_vec() })
            .unwrap(),
        PiecewiseAffineField::global_affine(dom.clone(), b, &vec![0.0; d * n * n])
            .unwrap()
            .reshaped(ValueShape::matrix(d, n))
            .unwrap(),
        PiecewiseConstantField::uniform(dom, ValueShape::tensor3(d, n), &vec![0.0; d * n * n]).unwrap(),
    )
    .unwrap()
}

fn quick_search() -> SearchConfig {
    SearchConfig { budget: 2, ..Default::default() }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn jump_set_canonicalization_is_idempotent(values in entries(9 * 2, 2.0)) {
        let f = PiecewiseConstantField::new(BoxDomain::unit(2, 3), ValueShape::vector(2), values).unwrap().to_affine();
        let once = jump_set(&f);
        let twice: Vec<_> = once.iter().cloned().map(|j| j.canonicalize()).collect();
        prop_assert_eq!(once, twice);
    }

    #[test]
    fn jump_mass_survives_refinement(values in entries(9, 2.0), factor in 2usize..4) {
        let f = PiecewiseConstantField::new(BoxDomain::unit(2, 3), ValueShape::vector(1), values).unwrap().to_affine();
        prop_assert!((total_jump_mass(&f) - total_jump_mass(&f.refine(factor))).abs() <= 1e-12);
    }

    #[test]
    fn gauss_green_closes_on_staircases(a in entries(4, 3.0), slabs in 1usize..5) {
        let u = staircase(&a, 2, slabs, &BoxDomain::unit(2, 1)).unwrap();
        prop_assert!(gauss_green_residual(&u).iter().all(|r| r.abs() <= 1e-10));
    }

    #[test]
    fn staircase_bound_is_tight_iff_columns_agree(a in entries(4, 3.0), equalize in any::<bool>()) {
        let mut a = a;
        if equalize {
            let r = norm(&column(&a, 2, 2, 1)) / norm(&column(&a, 2, 2, 0)).max(1e-300);
            a[0] *= r;
            a[2] *= r;
        }
        let u = staircase(&a, 2, 3, &BoxDomain::unit(2, 1)).unwrap();
        let mass = total_jump_mass(&u);
        let bound = 2f64.sqrt() * norm(&a);
        let c0 = norm(&column(&a, 2, 2, 0));
        let c1 = norm(&column(&a, 2, 2, 1));
        prop_assert!(mass <= bound + 1e-12);
        if (c0 - c1).abs() <= 1e-12 * bound.max(1.0) {
            prop_assert!((bound - mass).abs() <= 1e-10 * bound.max(1.0));
        }
        if (c0 - c1).abs() > 1e-3 {
            prop_assert!(bound - mass > 1e-9);
        }
    }

    #[test]
    fn extension_is_positively_homogeneous(lam in entries(2, 3.0), theta in entries(2, 3.0), t in 0.01f64..100.0) {
        let dens = norms(2, 2);
        let psi = &dens.psi1.as_ref().unwrap().density;
        let x = [0.3, 0.6];
        let scaled: Vec<f64> = theta.iter().map(|v| t * v).collect();
        let lhs = extend_homogeneous(psi.as_ref(), &x, &lam, &scaled);
        let rhs = t * extend_homogeneous(psi.as_ref(), &x, &lam, &theta);
        prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs.abs().max(1.0));
    }

    #[test]
    fn norm_recession_is_the_norm_of_m(a in entries(4, 3.0), m in entries(8, 3.0)) {
        let dens = norms(2, 2);
        prop_assert!((dens.w_recession(&[0.5, 0.5], &a, &m) - norm(&m)).abs() <= 1e-2 * norm(&m).max(1.0));
    }

    #[test]
    fn energy_is_additive_over_a_bisection(pieces in Pieces::strategy()) {
        let dens = norms(1, 2);
        let whole = total_energy(&pieces.field(BoxDomain::unit(2, 4)), &dens).unwrap();
        let left = total_energy(&pieces.field(BoxDomain::new(vec![0.0, 0.0], vec![0.5, 1.0], vec![2, 4]).unwrap()), &dens).unwrap();
        let right = total_energy(&pieces.field(BoxDomain::new(vec![0.5, 0.0], vec![1.0, 1.0], vec![2, 4]).unwrap()), &dens).unwrap();
        for (w, l, r) in [
            (whole.bulk, left.bulk, right.bulk),
            (whole.jump1, left.jump1, right.jump1),
            (whole.jump2, left.jump2, right.jump2),
            (whole.total, left.total, right.total),
        ] {
            prop_assert!((w - l - r).abs() <= 1e-12 * w.abs().max(1.0), "{} vs {} + {}", w, l, r);
        }
    }

    #[test]
    fn energy_is_monotone_in_the_densities(pieces in Pieces::strategy()) {
        let small = norms(1, 2);
        let large = DensitySpec {
            w: Some(ComponentSpec::expression("norm(A) + 2*norm(M)")),
            psi1: Some(ComponentSpec::expression("1.5*norm(lam)")),
            psi2: Some(ComponentSpec::expression("norm(Lam) + 0.25")),
        }
        .build(1, 2)
        .unwrap();
        let u = pieces.field(BoxDomain::unit(2, 4));
        let (e, f) = (total_energy(&u, &small).unwrap(), total_energy(&u, &large).unwrap());
        prop_assert!(e.bulk <= f.bulk && e.jump1 <= f.jump1 && e.jump2 <= f.jump2 && e.total <= f.total);
    }

    #[test]
    fn inclusion_energy_ignores_box_size(b in entries(4, 2.0), a in unit_vector(2), shape in [0.5f64..2.0, 0.5..2.0]) {
        let l = Bilinear3::new(2, (0..8).map(|c| b[c / 2] * a[c % 2]).collect()).unwrap();
        let m = Bilinear3::zero(2);
        let energies: Vec<f64> = [0.1, 0.2, 0.4]
            .iter()
            .map(|r| inclusion_energy(&l, &m, &a, &BoxDescriptor::axis_aligned(vec![0.0, 0.0], vec![r * shape[0] / 2.0, r * shape[1] / 2.0])).unwrap())
            .collect();
        for e in &energies {
            prop_assert!((e - energies[0]).abs() <= 1e-10 * energies[0].max(1.0));
        }
    }

    #[test]
    fn inclusion_energy_is_at_least_the_closed_form(
        l in entries(8, 2.0), m in entries(8, 2.0), a in unit_vector(2),
        center in [-0.1f64..0.1, -0.1..0.1], half in [0.05f64..0.3, 0.05..0.3],
    ) {
        let (l, m) = (Bilinear3::new(2, l).unwrap(), Bilinear3::new(2, m).unwrap());
        let r = BoxDescriptor::axis_aligned(center.to_vec(), half.to_vec());
        prop_assume!(r.compactly_contained());
        prop_assert!(inclusion_energy(&l, &m, &a, &r).unwrap() >= closed_form_w2(&l, &m, &a).unwrap() - 1e-9);
    }

    #[test]
    fn closed_form_is_lipschitz_in_m(l in entries(27, 2.0), m1 in entries(27, 2.0), m2 in entries(27, 2.0), a in unit_vector(3)) {
        let l = Bilinear3::new(3, l).unwrap();
        let (b1, b2) = (Bilinear3::new(3, m1.clone()).unwrap(), Bilinear3::new(3, m2.clone()).unwrap());
        let gap = (closed_form_w2(&l, &b1, &a).unwrap() - closed_form_w2(&l, &b2, &a).unwrap()).abs();
        prop_assert!(gap <= 3f64.sqrt() * dist(&m1, &m2) + 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn gamma1_scales_with_the_jump(lambda in entries(2, 2.0), nu in unit_vector(2), t in 0.1f64..10.0) {
        let dens = norms(2, 2);
        let x = vec![0.5, 0.5];
        let base = estimate_gamma1(&CellProblem::gamma1(x.clone(), lambda.clone(), nu.clone()), &dens, &quick_search()).unwrap();
        let scaled: Vec<f64> = lambda.iter().map(|v| t * v).collect();
        let big = estimate_gamma1(&CellProblem::gamma1(x, scaled, nu), &dens, &quick_search()).unwrap();
        prop_assert!((big.upper - t * base.upper).abs() <= 1e-12 * big.upper.max(1.0));
        prop_assert_eq!(big.best, base.best);
    }

    #[test]
    fn larger_budget_never_raises_the_upper_bound(a in entries(4, 2.0), budget in 1usize..3) {
        let dens = norms(2, 2);
        let problem = CellProblem::w1(vec![0.5, 0.5], a, 2);
        let small = SearchConfig { budget, families: Some(vec!["staircase".into()]), ..Default::default() };
        let more = SearchConfig { budget: budget + 1, ..small.clone() };
        let all = SearchConfig { families: None, ..more.clone() };
        let (s, m, f) = (
            estimate_w1(&problem, &dens, &small).unwrap().upper,
            estimate_w1(&problem, &dens, &more).unwrap().upper,
            estimate_w1(&problem, &dens, &all).unwrap().upper,
        );
        prop_assert!(m <= s && f <= m, "{} {} {}", s, m, f);
    }

    #[test]
    fn w1_upper_bound_is_lipschitz(a in entries(4, 2.0), b in entries(4, 2.0)) {
        let dens = norms(2, 2);
        let ua = estimate_w1(&CellProblem::w1(vec![0.5, 0.5], a.clone(), 2), &dens, &quick_search()).unwrap();
        let ub = estimate_w1(&CellProblem::w1(vec![0.5, 0.5], b.clone(), 2), &dens, &quick_search()).unwrap();
        // Ψ₁ = |λ| has upper constant 1.
        prop_assert!(ua.upper <= ub.upper + 2f64.sqrt() * dist(&a, &b) + 1e-12);
    }

    #[test]
    fn brackets_are_ordered(lambda in entries(2, 2.0), nu in unit_vector(2), a in entries(4, 2.0)) {
        let dens = norms(2, 2);
        let g = estimate_gamma1(&CellProblem::gamma1(vec![0.5, 0.5], lambda, nu), &dens, &quick_search()).unwrap();
        let w = estimate_w1(&CellProblem::w1(vec![0.5, 0.5], a, 2), &dens, &quick_search()).unwrap();
        for r in [g, w] {
            prop_assert!(r.lower.is_none_or(|l| l <= r.upper + 1e-12));
        }
    }

    #[test]
    fn w2_search_stays_above_the_closed_form(b in entries(4, 2.0), a in unit_vector(2)) {
        let l: Vec<f64> = (0..8).map(|c| b[c / 2] * a[c % 2]).collect();
        let closed = closed_form_w2(&Bilinear3::new(2, l.clone()).unwrap(), &Bilinear3::zero(2), &a).unwrap();
        let dens = example_densities(&a).unwrap();
        let problem = CellProblem::w2(vec![0.0, 0.0], vec![0.0; 4], l, vec![0.0; 8], 2);
        let r = estimate_w2(&problem, &dens, &quick_search()).unwrap();
        prop_assert!(r.upper >= closed - 1e-9, "{} < {}", r.upper, closed);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn assembly_identities_and_sequence_consistency(
        (d, n) in prop_oneof![Just((1usize, 1usize)), Just((1, 2)), Just((2, 2))],
        seed_a in entries(4, 2.0), seed_b in entries(4, 2.0),
    ) {
        let a = &seed_a[..d * n];
        let b = &seed_b[..d * n];
        let sd2 = constant_sd2(a, b, d, n);
        let dens = norms(d, n);
        let cfg = AssemblyConfig { search: quick_search(), ..Default::default() };
        let report = assemble_relaxed_energy(&sd2, &dens, &cfg).unwrap();
        prop_assert_eq!(report.total.upper, report.i1.upper + report.i2.upper);
        prop_assert_eq!(report.total.lower, report.i1.lower.zip(report.i2.lower).map(|(x, y)| x + y));
        let uncached = assemble_relaxed_energy(&sd2, &dens, &AssemblyConfig { cache: false, ..cfg }).unwrap();
        prop_assert_eq!(serde_json::to_string(&report.total).unwrap(), serde_json::to_string(&uncached.total).unwrap());
        prop_assert_eq!(serde_json::to_string(&report.contributions).unwrap(), serde_json::to_string(&uncached.contributions).unwrap());
        if let Some(lower) = report.total.lower {
            for k in [2, 4, 8] {
                let s = approximating_sequence(&sd2, k, CorrectionGrid::Same).unwrap();
                let e = total_energy(&s.u, &dens).unwrap().total;
                prop_assert!(e >= lower - 1e-6, "n = {}: {} < {}", k, e, lower);
            }
        }
    }
}
