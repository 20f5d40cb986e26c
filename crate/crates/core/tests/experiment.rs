use polyflow::catalog::{parse_exponents, Catalog};
use polyflow::experiment::*;
use polyflow::goodness::BoxRegion;
use polyflow::homspace::{haar_expectation, reduce_basis, siegel_transform, TestFunction};
use polyflow::linalg::Matrix;
use polyflow::polyalg::{parse_matrix, Exponent};
use polyflow::PolyMatrix;

fn m(rows: &[&[&str]]) -> PolyMatrix {
    let rows: Vec<Vec<&str>> = rows.iter().map(|r| r.to_vec()).collect();
    parse_matrix(&rows).unwrap()
}

fn horocycle() -> PolyMatrix {
    m(&[&["1", "x"], &["0", "1"]])
}

fn grid(per_axis: usize, workers: usize) -> SweepOptions {
    SweepOptions {
        sampling: Sampling::Grid { per_axis },
        eps0: vec![0.1, 0.05],
        workers,
        seed: 0,
    }
}

fn one() -> Vec<Exponent> {
    parse_exponents("1").unwrap()
}

#[test]
fn horocycle_average_is_periodic() {
    let f = TestFunction::indicator(0.5);
    let unit = birkhoff_average(&horocycle(), &BoxSpec::new(one(), 1.0, 4000), &f, 1).unwrap();
    let ten = birkhoff_average(&horocycle(), &BoxSpec::new(one(), 10.0, 40000), &f, 1).unwrap();
    assert!((unit - ten).abs() < 1e-3, "{unit} vs {ten}");
}

#[test]
fn identity_map_gives_the_point_value() {
    let f = TestFunction::indicator(1.0);
    let want = siegel_transform(&reduce_basis(Matrix::identity(2)).unwrap(), &f).unwrap();
    let got = birkhoff_average(&PolyMatrix::identity(2), &BoxSpec::new(one(), 7.0, 16), &f, 1).unwrap();
    assert_eq!(got, want);
}

#[test]
fn tiny_grids_are_rejected() {
    let f = TestFunction::indicator(1.0);
    let err = birkhoff_average(&horocycle(), &BoxSpec::new(one(), 10.0, 7), &f, 1);
    assert!(matches!(err, Err(ExperimentError::Precondition(_))));
    let bad = BoxRegion::new(vec![0.5], vec![1.5]).unwrap();
    assert!(BoxSpec::new(one(), 1.0, 8).with_subbox(bad).is_err());
}

#[test]
fn full_subbox_is_the_birkhoff_average() {
    let cat = Catalog::builtin();
    let map = cat.get("ul_product").unwrap();
    let f = TestFunction::indicator(1.0);
    let spec = BoxSpec::new(map.lambda.clone(), 50.0, 200);
    let full = birkhoff_average(&map.matrix, &spec, &f, 1).unwrap();
    let sub = subbox_average(&map.matrix, &map.lambda, 50.0, &BoxRegion::unit(2), 200, &f, 1).unwrap();
    assert!((full - sub).abs() <= 0.01 * full.abs());
}

#[test]
fn corner_subbox_approaches_haar() {
    let cat = Catalog::builtin();
    let map = cat.get("ul_product").unwrap();
    let f = TestFunction::indicator(1.0);
    let j = BoxRegion::new(vec![0.5, 0.5], vec![1.0, 1.0]).unwrap();
    let res = convergence_sweep(&map.matrix, &map.lambda, &[10.0, 100.0, 1000.0], &[f], &j, &Reference::Haar, &grid(400, 1))
        .unwrap();
    let gaps: Vec<f64> = res.rows.iter().map(|r| r.gap).collect();
    assert!(gaps[0] > gaps[1] && gaps[1] > gaps[2], "{gaps:?}");
}

#[test]
fn point_like_cell_is_one_evaluation() {
    let cat = Catalog::builtin();
    let map = cat.get("ul_product").unwrap();
    let lambda = parse_exponents("1,1").unwrap();
    let f = TestFunction::indicator(1.5);
    let j = BoxRegion::new(vec![0.5, 0.5], vec![0.5 + 1e-9, 0.5 + 1e-9]).unwrap();
    let got = subbox_average(&map.matrix, &lambda, 1.5, &j, 8, &f, 1).unwrap();
    // theta at x = y = 3/4
    let g = Matrix::from_rows(vec![vec![1.5625, 0.75], vec![0.75, 1.0]]);
    assert_eq!(got, siegel_transform(&reduce_basis(g).unwrap(), &f).unwrap());
}

#[test]
fn nondivergence_examples() {
    let id = nondivergence_fraction(&PolyMatrix::identity(2), &BoxSpec::new(one(), 5.0, 64), &[1.0, 0.5, 0.0], 1).unwrap();
    assert_eq!(id, vec![1.0, 1.0, 1.0]);
    let h = nondivergence_fraction(&horocycle(), &BoxSpec::new(one(), 1000.0, 4096), &[0.1, 0.0], 1).unwrap();
    assert!(h[0] >= 0.9);
    assert_eq!(h[1], 1.0);
}

#[test]
fn horocycle_matches_its_period_average() {
    let cat = Catalog::builtin();
    let map = cat.get("heis52").unwrap();
    let reference = Reference::for_map(map);
    assert!(matches!(reference, Reference::Periodic { .. }));
    let fs = [TestFunction::indicator(1.0), TestFunction::bump(2.0)];
    let res = convergence_sweep(&map.matrix, &one(), &[10.0, 100.0, 1000.0], &fs, &BoxRegion::unit(1), &reference, &grid(10007, 1))
        .unwrap();
    assert_eq!(res.rows.len(), 6);
    for r in &res.rows {
        assert!(r.gap < 1e-3, "{r:?}");
    }
    let r1 = res.rows_for("siegel:indicator:1")[0];
    assert!((r1.average - haar_expectation(&fs[0], 2)).abs() > 0.1 * std::f64::consts::PI);
}

#[test]
fn identity_sweep_rows_are_constant() {
    let f = TestFunction::indicator(1.0);
    let res = convergence_sweep(&PolyMatrix::identity(2), &one(), &[10.0, 100.0], &[f], &BoxRegion::unit(1), &Reference::Haar, &grid(8, 1))
        .unwrap();
    for r in &res.rows {
        assert_eq!(r.average, 4.0);
    }
    assert!(convergence_sweep(&PolyMatrix::identity(2), &one(), &[100.0, 10.0], &[f], &BoxRegion::unit(1), &Reference::Haar, &grid(8, 1))
        .is_err());
}

#[test]
fn twodim_sweep_shapes() {
    let cat = Catalog::builtin();
    let map = cat.get("twodim_p3_seeded").unwrap();
    let f = TestFunction::indicator(1.0);
    let res = twodim_bcondition_sweep(&map.matrix, Exponent::from_integer(4), &[5.0], &[f], &Reference::Haar, &grid(64, 1)).unwrap();
    assert_eq!(res.rows.len(), 1);
    assert_eq!(res.diagnostics.len(), 2);
    assert!(res.rows[0].samples == 64 * 64);
}

#[test]
fn product_map_with_b_one_converges() {
    let cat = Catalog::builtin();
    let map = cat.get("ul_product").unwrap();
    let f = TestFunction::indicator(1.0);
    let res = twodim_bcondition_sweep(&map.matrix, Exponent::from_integer(1), &[5.0, 10.0, 20.0], &[f], &Reference::Haar, &grid(400, 1))
        .unwrap();
    let gaps: Vec<f64> = res.rows.iter().map(|r| r.gap).collect();
    assert!(gaps[0] > gaps[1] && gaps[1] > gaps[2], "{gaps:?}");
}

#[test]
fn results_do_not_depend_on_worker_count() {
    let cat = Catalog::builtin();
    let map = cat.get("nonproduct2").unwrap();
    let fs = [TestFunction::indicator(1.0), TestFunction::bump(1.5)];
    let mc = |workers| SweepOptions {
        sampling: Sampling::MonteCarlo { samples: 20_000, seed: 42 },
        eps0: vec![0.1],
        workers,
        seed: 42,
    };
    for opts in [grid(150, 1), mc(1)] {
        let base = convergence_sweep(&map.matrix, &map.lambda, &[30.0, 300.0], &fs, &BoxRegion::unit(2), &Reference::Haar, &opts)
            .unwrap();
        for workers in [2, 8] {
            let o = SweepOptions { workers, ..opts.clone() };
            let other = convergence_sweep(&map.matrix, &map.lambda, &[30.0, 300.0], &fs, &BoxRegion::unit(2), &Reference::Haar, &o)
                .unwrap();
            assert_eq!(base.to_csv(), other.to_csv());
        }
    }
}

#[test]
fn monte_carlo_depends_on_the_seed_only() {
    let map = CompiledMap::new(&horocycle(), 1).unwrap();
    let b = BoxRegion::new(vec![0.0], vec![3.0]).unwrap();
    let f = [TestFunction::indicator(1.5)];
    let s = |seed| Sampling::MonteCarlo { samples: 5000, seed };
    let a = observe(&map, &b, &s(1), &f, &[], 1).unwrap();
    assert_eq!(a, observe(&map, &b, &s(1), &f, &[], 3).unwrap());
    assert_ne!(a, observe(&map, &b, &s(2), &f, &[], 1).unwrap());
}

#[test]
fn large_entries_take_the_exact_path() {
    // at x ~ 2^21 the entries exceed FLOAT_BOUND; the lattice is still Z^2
    let map = CompiledMap::new(&horocycle(), 1).unwrap();
    let x = 2.0 * FLOAT_BOUND + 3.0;
    let lat = map.lattice(&[x]).unwrap();
    assert!((lat.shortest_vector_length() - 1.0).abs() < 1e-12);
    let f = TestFunction::indicator(1.0);
    assert_eq!(siegel_transform(&lat, &f).unwrap(), 4.0);
}

#[test]
fn csv_numbers_round_trip() {
    let cat = Catalog::builtin();
    let map = cat.get("ul_product").unwrap();
    let f = TestFunction::indicator(1.0);
    let res = convergence_sweep(&map.matrix, &map.lambda, &[10.0, 20.0], &[f], &BoxRegion::unit(2), &Reference::Haar, &grid(32, 1))
        .unwrap();
    let csv = res.to_csv();
    let mut lines = csv.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let col = |name: &str| header.iter().position(|h| *h == name).unwrap();
    for (line, row) in lines.zip(&res.rows) {
        let cells: Vec<&str> = line.split(',').collect();
        assert_eq!(cells[col("average")].parse::<f64>().unwrap(), row.average);
        assert_eq!(cells[col("gap")].parse::<f64>().unwrap(), row.gap);
        assert_eq!(cells[col("reference")].parse::<f64>().unwrap(), row.reference);
        assert_eq!(cells[col("nondivergence@0.1")].parse::<f64>().unwrap(), row.fractions[0]);
    }
    assert_eq!(res.plot_csv().lines().count(), 3);
}
