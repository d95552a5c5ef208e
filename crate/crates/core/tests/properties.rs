use nasp_core::instances::energy::{gen_energy, GenConfig};
use nasp_core::instances::games::{random_complementarity_set, random_trivial};
use nasp_core::lcp::{balas_hull, enumerate_pieces, optimize_over_set, ComplementaritySet, SetOutcome};
use nasp_core::linalg::{dot, invert, Matrix};
use nasp_core::nasp::{decompose_mixed, deviation_check, full_enumeration, LeaderHull, SolveOptions};
use nasp_core::rng::Lcg;
use nasp_core::{solve_lp, tol, LinearProgram, LpOutcome, Unlimited};
use proptest::prelude::*;

/// Minimum over vertices: every choice of `n` rows that pins a unique point.
/// Valid when the region is bounded.
fn vertex_minimum(rows: &[(Vec<f64>, f64)], c: &[f64]) -> Option<f64> {
    let n = c.len();
    let mut best: Option<f64> = None;
    let mut pick = vec![0usize; n];
    fn walk(
        rows: &[(Vec<f64>, f64)],
        c: &[f64],
        from: usize,
        depth: usize,
        pick: &mut Vec<usize>,
        best: &mut Option<f64>,
    ) {
        let n = c.len();
        if depth == n {
            let a = Matrix::from_rows(n, &pick.iter().map(|&i| rows[i].0.clone()).collect::<Vec<_>>());
            let Some(inv) = invert(&a, 1e-10) else { return };
            let b: Vec<f64> = pick.iter().map(|&i| rows[i].1).collect();
            let x = inv.mul_vec(&b);
            if rows.iter().all(|(r, rhs)| dot(r, &x) <= rhs + 1e-9) {
                let v = dot(c, &x);
                *best = Some(best.map_or(v, |b: f64| b.min(v)));
            }
            return;
        }
        for i in from..rows.len() {
            pick[depth] = i;
            walk(rows, c, i + 1, depth + 1, pick, best);
        }
    }
    walk(rows, c, 0, 0, &mut pick, &mut best);
    best
}

/// Best value over every piece by plain LP, without branch-and-bound.
/// `None` means infeasible, `Some(None)` unbounded.
fn piecewise_minimum(s: &ComplementaritySet, c: &[f64]) -> Option<Option<f64>> {
    let n = s.dim;
    let m = s.pairs();
    let mut best: Option<Option<f64>> = None;
    for code in 0..1u32 << m {
        let mut lp = LinearProgram::new(c.to_vec());
        for (r, &b) in s.a.iter_rows().zip(&s.b) {
            lp = lp.le(r, b);
        }
        for (r, &b) in s.a_eq.iter_rows().zip(&s.b_eq) {
            lp = lp.eq(r, b);
        }
        for i in 0..m {
            let mut unit = vec![0.0; n];
            unit[s.compl[i]] = 1.0;
            let row = s.m.row(i);
            if code >> (m - 1 - i) & 1 == 1 {
                lp = lp.eq(row, -s.q[i]);
                lp = lp.le(&unit.iter().map(|v| -v).collect::<Vec<_>>(), 0.0);
            } else {
                lp = lp.eq(&unit, 0.0);
                lp = lp.le(&row.iter().map(|v| -v).collect::<Vec<_>>(), s.q[i]);
            }
        }
        match solve_lp(&lp).unwrap() {
            LpOutcome::Infeasible => {}
            LpOutcome::Unbounded { .. } => best = Some(None),
            LpOutcome::Optimal { value, .. } => {
                if best != Some(None) {
                    best = Some(Some(best.flatten().map_or(value, |b: f64| b.min(value))));
                }
            }
        }
    }
    best
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn simplex_matches_vertex_enumeration(
        n in 2usize..4,
        extra in proptest::collection::vec((proptest::collection::vec(-3i32..=3, 3), -2i32..=6), 0..4),
        c in proptest::collection::vec(-5i32..=5, 3),
    ) {
        let c: Vec<f64> = c[..n].iter().map(|&v| v as f64).collect();
        let mut rows = Vec::new();
        for j in 0..n {
            let mut r = vec![0.0; n];
            r[j] = 1.0;
            rows.push((r.clone(), 5.0));
            r[j] = -1.0;
            rows.push((r, 5.0));
        }
        for (r, b) in &extra {
            rows.push((r[..n].iter().map(|&v| v as f64).collect(), *b as f64));
        }
        let lp = rows.iter().fold(LinearProgram::new(c.clone()), |lp, (r, b)| lp.le(r, *b));
        let got = solve_lp(&lp).unwrap();
        match vertex_minimum(&rows, &c) {
            None => prop_assert_eq!(got, LpOutcome::Infeasible),
            Some(v) => match got {
                LpOutcome::Optimal { value, point } => {
                    prop_assert!((value - v).abs() < 1e-7, "simplex {} vertices {}", value, v);
                    prop_assert!(rows.iter().all(|(r, b)| dot(r, &point) <= b + 1e-7));
                }
                other => prop_assert!(false, "expected optimum {}, got {:?}", v, other),
            },
        }
    }

    #[test]
    fn branch_and_bound_matches_piecewise_lp(seed in any::<u64>()) {
        let mut rng = Lcg::new(seed);
        let s = random_complementarity_set(&mut rng, 8);
        let c: Vec<f64> = (0..s.dim).map(|_| rng.below(7) as f64 - 3.0).collect();
        let got = optimize_over_set(&s, &c).unwrap();
        match (piecewise_minimum(&s, &c), got) {
            (None, SetOutcome::Infeasible) => {}
            (Some(None), SetOutcome::Unbounded { point, ray }) => {
                prop_assert!(s.contains(&point, 1e-6));
                prop_assert!(dot(&c, &ray) < 0.0);
            }
            (Some(Some(v)), SetOutcome::Optimal { value, point }) => {
                prop_assert!((value - v).abs() < 1e-7, "b&b {} pieces {}", value, v);
                prop_assert!(s.contains(&point, 1e-6));
            }
            (want, got) => prop_assert!(false, "oracle {:?}, b&b {:?}", want, got),
        }
    }

    #[test]
    fn decomposition_recovers_weights_and_mean(seed in any::<u64>()) {
        let mut rng = Lcg::new(seed);
        let s = loop {
            let mut s = random_complementarity_set(&mut rng, 3);
            // keep it bounded so that every piece has a finite point
            for j in 0..s.dim {
                let mut r = vec![0.0; s.dim];
                r[j] = 1.0;
                s.push_le(&r, 6.0);
            }
            if !enumerate_pieces(&s).unwrap().is_empty() {
                break s;
            }
        };
        let pieces = enumerate_pieces(&s).unwrap();
        let polys: Vec<_> = pieces.iter().map(|p| p.polyhedron.clone()).collect();
        let hull = balas_hull(&polys).unwrap();
        // one point per piece, weights from the generator
        let points: Vec<Vec<f64>> = polys
            .iter()
            .map(|p| {
                let c: Vec<f64> = (0..s.dim).map(|_| rng.uniform(-1.0, 1.0)).collect();
                match p.minimize(&c).unwrap() {
                    LpOutcome::Optimal { point, .. } => point,
                    o => panic!("bounded piece gave {o:?}"),
                }
            })
            .collect();
        let raw: Vec<f64> = (0..polys.len()).map(|_| rng.uniform(0.05, 1.0)).collect();
        let total: f64 = raw.iter().sum();
        let w: Vec<f64> = raw.iter().map(|v| v / total).collect();
        let mut z = vec![0.0; hull.lifted_dim()];
        for (j, (p, &wj)) in points.iter().zip(&w).enumerate() {
            for (k, v) in p.iter().enumerate() {
                z[k] += wj * v;
            }
            for (slot, &c) in hull.copy_range(j).zip(&hull.pieces[j].free) {
                z[slot] = wj * p[c];
            }
            z[hull.delta_index(j)] = wj;
        }
        let leader = LeaderHull { encodings: pieces.iter().map(|p| p.encoding.clone()).collect(), pieces: polys, hull };
        let mixed = decompose_mixed(&s, &leader, &z).unwrap();
        let sum: f64 = mixed.support.iter().map(|p| p.probability).sum();
        prop_assert!((sum - 1.0).abs() < 1e-9);
        let mean = mixed.mean();
        for (a, b) in mean.iter().zip(&z[..s.dim]) {
            prop_assert!((a - b).abs() < 1e-7, "mean {:?} hull point {:?}", mean, &z[..s.dim]);
        }
        for sp in &mixed.support {
            prop_assert!(s.contains(&sp.point, tol::FEAS));
        }
    }

    #[test]
    fn generators_are_deterministic(seed in any::<u64>()) {
        let cfg = GenConfig { seed, ..GenConfig::default() };
        let a = serde_json::to_string(&gen_energy(&cfg).unwrap()).unwrap();
        let b = serde_json::to_string(&gen_energy(&cfg).unwrap()).unwrap();
        prop_assert_eq!(a, b);
        let g1 = serde_json::to_string(&random_trivial(&mut Lcg::new(seed))).unwrap();
        let g2 = serde_json::to_string(&random_trivial(&mut Lcg::new(seed))).unwrap();
        prop_assert_eq!(g1, g2);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn returned_equilibria_survive_the_deviation_check(seed in any::<u64>()) {
        let g = random_trivial(&mut Lcg::new(seed));
        let r = full_enumeration(&g, &SolveOptions::default()).unwrap();
        if let Some(p) = r.profile {
            let check = deviation_check(&g, &p, tol::DEVIATION, &Unlimited).unwrap();
            prop_assert!(check.is_equilibrium(), "{:?}", check.deviations);
            for s in &p.leaders {
                let sum: f64 = s.support.iter().map(|x| x.probability).sum();
                prop_assert!((sum - 1.0).abs() < 1e-9);
            }
        }
    }
}
