use polyflow::goodness::*;
use polyflow::polyalg::{DensePoly, Var};
use polyflow::catalog::Catalog;
use polyflow::GenPoly;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn interval(a: f64, b: f64) -> BoxRegion {
    BoxRegion::new(vec![a], vec![b]).unwrap()
}

fn random_poly(rng: &mut ChaCha8Rng, k: usize, l: u32) -> GenPoly {
    let mut text = Vec::new();
    let names = ["x", "y"];
    for i in 0..=l {
        for j in 0..=(l - i) {
            if k == 1 && j > 0 {
                continue;
            }
            let mut c: i32 = rng.gen_range(-3..=3);
            if i + j == l && i == l && c == 0 {
                c = 1;
            }
            if c != 0 {
                text.push(format!("({c}) * {}^{i} * {}^{j}", names[0], names[1]));
            }
        }
    }
    text.join(" + ").parse().unwrap()
}

fn dense(p: &GenPoly) -> DensePoly<f64> {
    DensePoly::new(p, &[Var::X(0), Var::X(1)]).unwrap()
}

#[test]
fn sublevel_measures_match_closed_forms() {
    let b = BoxRegion::unit(1);
    let grid = 20_000;
    let cases: [(&(dyn Fn(&[f64]) -> f64 + Sync), fn(f64) -> f64); 3] = [
        (&|x: &[f64]| x[0], |d| d),
        (&|x: &[f64]| x[0] * x[0], f64::sqrt),
        (&|x: &[f64]| x[0] * (1.0 - x[0]), |d| 1.0 - (1.0 - 4.0 * d).sqrt()),
    ];
    for (f, exact) in cases {
        let s = SublevelSampler::new(&f, &b, grid).unwrap();
        for d in [0.01, 0.03, 0.1, 0.2] {
            let want = exact(d);
            assert!((s.measure(d) - want).abs() <= 0.01 * want, "delta {d}: {} vs {want}", s.measure(d));
        }
    }
}

#[test]
fn fitted_constants() {
    let b = BoxRegion::unit(1);
    let deltas = [0.5, 0.25, 0.1, 0.05, 0.01];
    let c = fit_min_c(&|x: &[f64]| x[0], &b, 1.0, &deltas, 1000).unwrap();
    assert!((c - 1.0).abs() < 1e-9);
    let c = fit_min_c(&|x: &[f64]| x[0] * x[0], &b, 0.5, &[0.25, 0.04, 0.01], 1000).unwrap();
    assert!((c - 1.0).abs() < 1e-9);
    // x(1-x): |{x(1-x) < d}| = 1 - sqrt(1-4d), sup = 1/4.
    let c = fit_min_c(&|x: &[f64]| x[0] * (1.0 - x[0]), &b, 0.5, &deltas[1..], 10_000).unwrap();
    let oracle = deltas[1..]
        .iter()
        .map(|&d: &f64| (1.0 - (1.0 - 4.0 * d).sqrt()) / (4.0 * d).sqrt())
        .fold(0.0, f64::max);
    assert!(c >= 1.0 && (c - oracle).abs() < 1e-2 * oracle, "{c} vs {oracle}");
}

#[test]
fn random_polynomials_are_good_across_delta_grids() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x600d);
    // Log-spaced, ratio 2^(1/4) from 1/128 to 1/2; test points sit midway.
    let train: Vec<f64> = (0..=24).map(|i| 0.5 * 2f64.powf(-i as f64 / 4.0)).collect();
    let test: Vec<f64> = (0..24).map(|i| 0.5 * 2f64.powf(-(i as f64 + 0.5) / 4.0)).collect();
    let mut violations = Vec::new();
    for case in 0..200 {
        let k = 1 + case % 2;
        let l = rng.gen_range(1..=4);
        let p = random_poly(&mut rng, k, l);
        let f = dense(&p);
        let eval = |x: &[f64]| f.eval(x);
        let lower: Vec<f64> = (0..k).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let upper: Vec<f64> = lower.iter().map(|a| a + rng.gen_range(0.5..3.0)).collect();
        let b = BoxRegion::new(lower, upper).unwrap();
        let grid = if k == 1 { 4000 } else { 300 };
        let norm = SublevelSampler::new(&eval, &b, grid).unwrap().norm();
        let scale = |ds: &[f64]| ds.iter().map(|d| d * norm).collect::<Vec<_>>();
        let cert = certify(&eval, &b, l, &scale(&train), &scale(&test), grid).unwrap();
        if !cert.holds() {
            violations.push(format!("{p} on {b:?}: {cert:?}"));
        }
    }
    assert!(violations.is_empty(), "{violations:#?}");
}

#[test]
fn fitted_constant_is_scale_and_translation_invariant() {
    let b = BoxRegion::new(vec![0.0, -1.0], vec![1.5, 1.0]).unwrap();
    let shift = [3.0, -2.0];
    let moved = b.translated(&shift);
    let f = |x: &[f64]| x[0] * x[0] - x[1] + 0.3 * x[0] * x[1];
    let g = |x: &[f64]| -7.5 * f(x);
    let h = |x: &[f64]| f(&[x[0] - shift[0], x[1] - shift[1]]);
    let deltas = [0.3, 0.1, 0.03];
    let grid = 400;
    let c = fit_min_c(&f, &b, 0.25, &deltas, grid).unwrap();
    let cg = fit_min_c(&g, &b, 0.25, &deltas.map(|d| 7.5 * d), grid).unwrap();
    let ch = fit_min_c(&h, &moved, 0.25, &deltas, grid).unwrap();
    let slack = 4.0 / grid as f64;
    assert!((c - cg).abs() <= slack * c, "{c} vs {cg}");
    assert!((c - ch).abs() <= slack * c, "{c} vs {ch}");
}

#[test]
fn sup_extension_holds_for_random_polynomials() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5e7);
    for _ in 0..100 {
        let l = rng.gen_range(1..=4);
        let p = random_poly(&mut rng, 1, l);
        let f = dense(&p);
        let eval = |x: &[f64]| f.eval(x);
        let e = interval(-1.0, 1.0);
        let a = rng.gen_range(-1.0..0.5);
        let e_prime = interval(a, a + rng.gen_range(0.1..(1.0 - a)));
        let r = sup_norm(&eval, &e_prime, 201) * 1.01 + 1e-9;
        // alpha = 1/l with C from the fitted constant on E.
        let alpha = 1.0 / l as f64;
        let norm = sup_norm(&eval, &e, 2001);
        let c = fit_min_c(&eval, &e, alpha, &[0.5, 0.2, 0.1, 0.05, 0.01].map(|d| d * norm), 2000)
            .unwrap()
            .max(1.0);
        let ext = sup_extension(&eval, &e, &e_prime, r, c, alpha, 201).unwrap();
        assert!(ext.verified, "{p} on {e_prime:?}: {ext:?}");
    }
}

#[test]
fn greedy_cover_multiplicity_is_bounded() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xbe5);
    for case in 0..500 {
        let k = 1 + case % 3;
        let n = rng.gen_range(1..40);
        let centers: Vec<Vec<f64>> = (0..n).map(|_| (0..k).map(|_| rng.gen_range(0.0..4.0)).collect()).collect();
        let widths: Vec<f64> = (0..n).map(|_| rng.gen_range(0.05..1.5)).collect();
        let cover = besicovitch_select_with(&centers, &widths, default_nk(k), 8).unwrap();
        assert!(cover.covered, "case {case}: {centers:?} {widths:?}");
        assert!(cover.within_bound(), "case {case}: multiplicity {} for {centers:?} {widths:?}", cover.multiplicity);
        let probed = cover.histogram.len() - 1;
        assert!(probed <= cover.multiplicity);
    }
}

fn scenario(name: &str, v0: &[f64], p: &str, b: BoxRegion, eps: f64) -> RelativeCheck {
    let cat = Catalog::builtin();
    let map = cat.get(name).unwrap();
    let k = b.dim() as u32;
    let l = map.matrix.entries().iter().map(|e| e.total_degree()).max().unwrap();
    let l = match l {
        polyflow::polyalg::Degree::Finite(d) => *d.numer() as u32,
        _ => unreachable!(),
    };
    let p: GenPoly = p.parse().unwrap();
    let rs = relative_size_neighborhoods(&p, map.dim(), 1.0, eps, k, l, 1.0, default_nk(b.dim()), 1.0).unwrap();
    relative_size_check(&map.matrix, v0, &b, &rs.psi, &rs.phi, eps, 20_000).unwrap()
}

#[test]
fn relative_size_on_unipotent_orbit() {
    for eps in [0.5, 0.25] {
        let c = scenario("heis52", &[0.0, 1.0], "x", interval(-2.0, 2.0), eps);
        assert_eq!(c.verdict, Verdict::Holds, "{c:?}");
        assert!(c.lhs > 0.0 && c.lhs <= c.rhs);
    }
}

#[test]
fn relative_size_empty_psi_and_vacuous() {
    let theta: polyflow::PolyMatrix = polyflow::polyalg::parse_matrix(&[vec!["1", "x"], vec!["0", "1"]]).unwrap();
    let p: GenPoly = "x".parse().unwrap();
    let phi = Neighborhood::new(&p, 2, 10.0, 1.0).unwrap();
    let psi = Neighborhood::new(&p, 2, 0.5, 0.1).unwrap();
    // The orbit (x, 1) has norm >= 1, so it never meets Psi.
    let c = relative_size_check(&theta, &[0.0, 1.0], &interval(-2.0, 2.0), &psi, &phi, 0.5, 1000).unwrap();
    assert_eq!((c.verdict, c.lhs), (Verdict::Holds, 0.0));
    let id = polyflow::PolyMatrix::identity(2);
    let psi = Neighborhood::new(&p, 2, 2.0, 0.1).unwrap();
    let c = relative_size_check(&id, &[0.0, 1.0], &interval(-2.0, 2.0), &psi, &phi, 0.5, 100).unwrap();
    assert_eq!(c.verdict, Verdict::Vacuous);
}
