use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use spgrid::bench::{convergence_order, format_float};
use spgrid::linsolve::{assemble_nodal, thomas_solve};
use spgrid::mesh::parse_listing;
use spgrid::quasi::{self, analytic_vs_fd_jacobian};
use spgrid::twogrid::choose_r;
use spgrid::{
    Linearization, Mesh, MeshFamily, MeshSpec, NewtonConfig, NonlinearScheme, PiecewiseLinear,
    ProblemId, TridiagonalSystem,
};

fn family() -> impl Strategy<Value = MeshFamily> {
    prop_oneof![
        Just(MeshFamily::Uniform),
        Just(MeshFamily::Shishkin),
        Just(MeshFamily::Bakhvalov),
        Just(MeshFamily::Vulanovic),
    ]
}

/// eps = 10^-k for k in [0, 8].
fn eps() -> impl Strategy<Value = f64> {
    (0.0f64..8.0).prop_map(|k| 10f64.powf(-k))
}

fn spec() -> impl Strategy<Value = MeshSpec> {
    (family(), eps(), 2usize..600, 0.5f64..4.0, 0.1f64..0.49)
        .prop_map(|(f, e, n, a, q)| MeshSpec::new(f, e, n).with_aq(a, q))
}

fn dense_solve(sys: &TridiagonalSystem) -> Vec<f64> {
    let m = sys.len();
    let mut a = vec![vec![0.0; m + 1]; m];
    for k in 0..m {
        a[k][k] = sys.diag[k];
        if k > 0 {
            a[k][k - 1] = sys.sub[k];
        }
        if k + 1 < m {
            a[k][k + 1] = sys.sup[k];
        }
        a[k][m] = sys.rhs[k];
    }
    for c in 0..m {
        let p = (c..m)
            .max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs()))
            .unwrap();
        a.swap(c, p);
        let pivot = a[c].clone();
        for row in a.iter_mut().skip(c + 1) {
            let f = row[c] / pivot[c];
            for (dst, src) in row[c..].iter_mut().zip(&pivot[c..]) {
                *dst -= f * src;
            }
        }
    }
    let mut x = vec![0.0; m];
    for r in (0..m).rev() {
        let s: f64 = (r + 1..m).map(|j| a[r][j] * x[j]).sum();
        x[r] = (a[r][m] - s) / a[r][r];
    }
    x
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn mesh_invariants(s in spec()) {
        let mesh = Mesh::build(&s).unwrap();
        let x = mesh.nodes();
        prop_assert_eq!(x.len(), s.n + 1);
        prop_assert_eq!(x[0], 0.0);
        prop_assert_eq!(x[s.n], 1.0);
        prop_assert!(x.windows(2).all(|w| w[0] < w[1]));
        for i in 0..=s.n {
            prop_assert!((x[i] + x[s.n - i] - 1.0).abs() <= 1e-14);
        }
        let total: f64 = mesh.steps().iter().sum();
        prop_assert!((total - 1.0).abs() <= 1e-12);
        let frac = mesh.layer_fraction(s.eps);
        // Counts nodes against intervals, so the bound is 100 (n + 1) / n.
        prop_assert!(frac >= 0.0 && frac <= 100.0 * (s.n + 1) as f64 / s.n as f64);
    }

    #[test]
    fn listing_round_trips(s in spec()) {
        let mesh = Mesh::build(&s).unwrap();
        let text = mesh.to_listing();
        let header = format!("# {} {} ", s.family, s.n);
        prop_assert!(text.starts_with(&header));
        prop_assert_eq!(parse_listing(&text).unwrap(), mesh.nodes().to_vec());
    }

    #[test]
    fn thomas_matches_dense(m in 1usize..200, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut sys = TridiagonalSystem::zeros(m);
        for k in 0..m {
            sys.sub[k] = if k > 0 { rng.gen_range(-1.0..1.0) } else { 0.0 };
            sys.sup[k] = if k + 1 < m { rng.gen_range(-1.0..1.0) } else { 0.0 };
            sys.diag[k] = sys.sub[k].abs() + sys.sup[k].abs() + rng.gen_range(0.1..2.0);
            sys.rhs[k] = rng.gen_range(-1.0..1.0);
        }
        let fast = thomas_solve(&sys).unwrap();
        let slow = dense_solve(&sys);
        let scale = slow.iter().fold(1.0f64, |a, v| a.max(v.abs()));
        for (a, b) in fast.iter().zip(&slow) {
            prop_assert!((a - b).abs() <= 1e-12 * scale);
        }
        prop_assert!(sys.residual_norm(&fast) <= 1e-12 * scale);
    }

    #[test]
    fn assembled_systems_are_m_matrices(s in spec(), seed in any::<u64>()) {
        let mesh = Mesh::build(&s).unwrap();
        let m = s.n - 1;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let b: Vec<f64> = (0..m).map(|_| rng.gen_range(0.01..10.0)).collect();
        let g = vec![0.0; m];
        let sys = assemble_nodal(&mesh, s.eps, &b, &g, 1.0, 1.0).unwrap();
        prop_assert!(sys.is_m_matrix_with_margin(|k| 0.5 * b[k]));
    }

    #[test]
    fn interpolant_stays_between_neighbours(s in spec(), seed in any::<u64>()) {
        let mesh = Mesh::build(&s).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let y: Vec<f64> = (0..=s.n).map(|_| rng.gen_range(-5.0..5.0)).collect();
        let pl = PiecewiseLinear::from_mesh(&mesh, &y).unwrap();
        let x = mesh.nodes();
        for _ in 0..64 {
            let q: f64 = rng.gen_range(0.0..=1.0);
            let k = x.partition_point(|&v| v <= q).saturating_sub(1).min(s.n - 1);
            let v = pl.eval(q).unwrap();
            prop_assert!(v >= y[k].min(y[k + 1]) && v <= y[k].max(y[k + 1]));
        }
        for (i, &xi) in x.iter().enumerate() {
            prop_assert_eq!(pl.eval(xi).unwrap(), y[i]);
        }
        prop_assert!(pl.eval(1.5).is_err());
    }

    #[test]
    fn interpolant_reproduces_lines(s in spec(), c0 in -3.0f64..3.0, c1 in -3.0f64..3.0) {
        let mesh = Mesh::build(&s).unwrap();
        let y: Vec<f64> = mesh.nodes().iter().map(|&x| c0 + c1 * x).collect();
        let pl = PiecewiseLinear::from_mesh(&mesh, &y).unwrap();
        let queries: Vec<f64> = (0..=257).map(|i| i as f64 / 257.0).collect();
        for (q, v) in queries.iter().zip(pl.eval_many(&queries).unwrap()) {
            prop_assert!((v - (c0 + c1 * q)).abs() <= 1e-13);
        }
    }

    #[test]
    fn format_float_keeps_six_digits(m in 1.0f64..10.0, e in -12i32..8, neg in any::<bool>()) {
        let v = if neg { -m } else { m } * 10f64.powi(e);
        let s = format_float(v);
        let back: f64 = s.parse().unwrap();
        prop_assert!((back - v).abs() <= 5e-6 * v.abs());
        prop_assert_eq!(s.contains('e'), v.abs() < 1e-3);
    }

    #[test]
    fn order_of_power_law(e0 in 1e-10f64..1.0, p in 0.5f64..5.0) {
        let o = convergence_order(e0, e0 * 2f64.powf(-p)).unwrap();
        prop_assert!((o - p).abs() <= 1e-9);
    }

    #[test]
    fn choose_r_balances_costs(n in 8usize..20_000) {
        let (r, fine) = choose_r(n).unwrap();
        let nf = n as f64;
        prop_assert!(r > 1.0 && r <= 2.0);
        let lhs = nf.powf(r) / r;
        let rhs = nf * nf / nf.ln();
        prop_assert!((lhs - rhs).abs() <= 1e-9 * rhs);
        prop_assert_eq!(fine, nf.powf(r).round() as usize);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn newton_converges_fast_and_jacobian_matches(
        id in prop_oneof![Just(ProblemId::Ex1), Just(ProblemId::Ex2)],
        f in prop_oneof![Just(MeshFamily::Shishkin), Just(MeshFamily::Bakhvalov), Just(MeshFamily::Vulanovic)],
        k in 1.0f64..6.0,
        n in 8usize..256,
    ) {
        let e = 10f64.powf(-k);
        let p = id.build(e).unwrap();
        let mesh = Mesh::build(&MeshSpec::new(f, e, n).with_aq(2.0, 0.4)).unwrap();
        let out = quasi::solve(&mesh, &p, &NewtonConfig::default()).unwrap();
        prop_assert!(out.converged);
        prop_assert!(out.iterations <= 8, "{} iterations", out.iterations);
        prop_assert!(analytic_vs_fd_jacobian(&mesh, &p, &out.y).unwrap() <= 1e-5);

        let jac = p.linearize(&mesh, &out.y, Linearization::Newton).unwrap();
        prop_assert!(jac.is_m_matrix_with_margin(|_| 0.0));
    }
}
