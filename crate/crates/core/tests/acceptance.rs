//! Acceptance suite: one test per criterion, each printing a PASS line with
//! its measured numbers (run with `--nocapture` to see them).
//!
//! The three certification criteria share one continuation fixture: a branch
//! seeded just above the first bifurcation and continued through the three
//! target dispersion values, exactly as the command-line workflow would.

mod common;

use std::sync::OnceLock;
use std::time::Instant;

use boussinesq::certify::{
    bound_y, bound_z0, bound_z1, bound_z2, CertCtx, TailKind, TailOperator,
};
use boussinesq::interval::{Interval, IvMatrix};
use boussinesq::pipeline::{prove_file, ProveCfg};
use boussinesq::problem::{energy, jacobian_entry, mu, residual};
use boussinesq::render::eval_grid;
use boussinesq::solver::{
    approx_inverse, continue_branch, newton_augmented, seed_branch, AugmentedSystem,
    BranchEntry, ContinueCfg, NewtonCfg,
};
use boussinesq::space::files::write_solution;
use boussinesq::space::{MultiIndex, Params, SymCoeffs, Trunc};
use ddouble::Dd;
use rand::{Rng, SeedableRng};

const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

struct BranchFixture {
    at_0_1446: BranchEntry,
    at_0_2346: BranchEntry,
    at_1_0846: BranchEntry,
}

fn branch_fixture() -> &'static BranchFixture {
    static FIXTURE: OnceLock<BranchFixture> = OnceLock::new();
    FIXTURE.get_or_init(|| {
        let p = Params {
            lambda: 0.027,
            l: TWO_PI,
            nu: 1.01,
            m1: 20,
            m2: 20,
        };
        let seed = seed_branch(MultiIndex::new(0, 1), &p, None);
        let e_target = energy(&seed, &p);
        let sys = AugmentedSystem {
            params: p,
            e_target,
        };
        let (x, diag) =
            newton_augmented(&sys, seed, &NewtonCfg::default()).expect("seed converges");
        let start = BranchEntry::from_converged(p, x, e_target, &diag);
        let cfg = ContinueCfg::default();
        let to_0_1446 = continue_branch(start, 0.1446, &cfg).expect("reach lambda = 0.1446");
        let at_0_1446 = to_0_1446.entries.last().unwrap().clone();
        let to_0_2346 =
            continue_branch(at_0_1446.clone(), 0.2346, &cfg).expect("reach lambda = 0.2346");
        assert!(
            to_0_2346.entries.len() <= 200,
            "the 0.1446 -> 0.2346 leg should take at most 200 steps"
        );
        let at_0_2346 = to_0_2346.entries.last().unwrap().clone();
        let to_1_0846 =
            continue_branch(at_0_2346.clone(), 1.0846, &cfg).expect("reach lambda = 1.0846");
        let at_1_0846 = to_1_0846.entries.last().unwrap().clone();
        BranchFixture {
            at_0_1446,
            at_0_2346,
            at_1_0846,
        }
    })
}

fn prove_entry_at(entry: &BranchEntry, m: usize) -> boussinesq::certify::Certificate {
    let dir = tempfile::tempdir().unwrap();
    let sol = dir.path().join("sol.txt");
    write_solution(&sol, &entry.params, &entry.x).unwrap();
    let cfg = ProveCfg {
        m_override: Some((m, m)),
        ..ProveCfg::default()
    };
    let artifacts =
        prove_file(&sol, &dir.path().join("cert.txt"), &cfg).expect("certification succeeds");
    artifacts.certificate
}

#[test]
fn criterion_1_proof_at_lambda_0_1446() {
    let t0 = Instant::now();
    let entry = &branch_fixture().at_0_1446;
    assert_eq!(entry.params.lambda, 0.1446);
    let cert = prove_entry_at(entry, 35);
    let r = cert.r_star;
    let reference_r = 1.07191e-11;
    assert!(cert.p_at_r_star.hi() < 0.0);
    // the quadratic term stays far from threatening the contraction
    let slope_room = 1.0 - cert.bounds.z0.hi() - cert.bounds.z1.hi();
    assert!(cert.bounds.z2.hi() * r < 1e-2 * slope_room);
    assert!(r <= 1e-9, "validated radius {r:.3e} exceeds 1e-9");
    assert!(
        r <= 100.0 * reference_r,
        "validated radius {r:.3e} is more than 100x the reference {reference_r:.3e}"
    );
    println!(
        "acceptance criterion 1: PASS (lambda = 0.1446, m = 35, r = {r:.6e}, reference r = {reference_r:.6e}, ratio = {:.2e}, {:.1?})",
        r / reference_r,
        t0.elapsed()
    );
}

#[test]
fn criterion_2_proof_at_lambda_0_2346() {
    let t0 = Instant::now();
    let entry = &branch_fixture().at_0_2346;
    assert_eq!(entry.params.lambda, 0.2346);
    let cert = prove_entry_at(entry, 61);
    let r = cert.r_star;
    assert!(cert.p_at_r_star.hi() < 0.0);
    assert!(r <= 1e-9, "validated radius {r:.3e} exceeds 1e-9");
    println!(
        "acceptance criterion 2: PASS (lambda = 0.2346, m = 61, r = {r:.6e}, reference r = 1.45275e-11, {:.1?})",
        t0.elapsed()
    );
}

#[test]
fn criterion_3_proof_at_lambda_1_0846() {
    let t0 = Instant::now();
    let entry = &branch_fixture().at_1_0846;
    assert_eq!(entry.params.lambda, 1.0846);
    let cert = prove_entry_at(entry, 61);
    let r = cert.r_star;
    assert!(cert.p_at_r_star.hi() < 0.0);
    assert!(r <= 1e-1, "validated radius {r:.3e} exceeds 1e-1");
    println!(
        "acceptance criterion 3: PASS (lambda = 1.0846, m = 61, r = {r:.6e}, reference r = 1.09053e-3, {:.1?})",
        t0.elapsed()
    );
}

#[test]
fn criterion_4_bound_dominance() {
    let t0 = Instant::now();
    let p = Params {
        lambda: 0.19,
        l: TWO_PI,
        nu: 1.01,
        m1: 3,
        m2: 3,
    };
    let t = p.trunc();
    let n = t.len();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0xacce97);
    let mut worst_margin = f64::INFINITY;
    for trial in 0..20 {
        let x = common::random_candidate(&mut rng, t, 0.5, 0.7);
        let jac = boussinesq::problem::jacobian_block::<f64>(&x, &p, t);
        let inv = approx_inverse(&nalgebra::DMatrix::from_row_slice(n, n, &jac)).unwrap();
        let mut a_float = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                a_float[i * n + j] = inv[(i, j)];
            }
        }
        let a = TailOperator::new(
            IvMatrix::from_points(n, n, &a_float),
            t,
            TailKind::MuInverse,
        );
        let xbar_iv = x.to_intervals();
        let dblock = boussinesq::problem::jacobian_block::<Interval>(&xbar_iv, &p, t);
        let adag = TailOperator::new(
            IvMatrix::from_fn(n, n, |i, j| dblock[i * n + j]),
            t,
            TailKind::Mu,
        );
        let ctx = CertCtx::new(p);

        let checks: [(&str, f64, Dd); 4] = [
            (
                "Y",
                bound_y(&xbar_iv, &a, &ctx).unwrap().hi(),
                common::oracle_y(&x, &p, &a_float),
            ),
            (
                "Z0",
                bound_z0(&a, &adag, &ctx).unwrap().hi(),
                common::oracle_z0(&x, &p, &a_float),
            ),
            (
                "Z1",
                bound_z1(&xbar_iv, &a, &ctx).unwrap().hi(),
                common::oracle_z1(&x, &p, &a_float),
            ),
            (
                "Z2",
                bound_z2(&a, &ctx).unwrap().hi(),
                common::oracle_z2(&x, &p, &a_float),
            ),
        ];
        for (name, upper, oracle) in checks {
            assert!(
                oracle <= Dd::from_f64(upper),
                "{name} dominance violated at trial {trial}: bound {upper:.17e} < brute force {:.17e}",
                oracle.to_f64()
            );
            let margin = upper - oracle.to_f64();
            if margin < worst_margin {
                worst_margin = margin;
            }
        }
    }
    println!(
        "acceptance criterion 4: PASS (20 candidates x 4 bounds dominate F_8m brute force, tightest margin {worst_margin:.2e}, {:.1?})",
        t0.elapsed()
    );
}

#[test]
fn criterion_5_ring_reduction_lemmas() {
    let t0 = Instant::now();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0x1e44a);
    let mut accepted = 0usize;
    while accepted < 10 {
        let lambda = 0.02 + rng.random::<f64>() * 1.5;
        let l = 1.0 + rng.random::<f64>() * 7.0;
        let m1 = 2 + (rng.random::<u32>() % 3) as usize;
        let m2 = m1 + (rng.random::<u32>() % 3) as usize;
        let p = Params {
            lambda,
            l,
            nu: 1.01,
            m1,
            m2,
        };
        if !boussinesq::certify::check_cond_m(&p) {
            continue;
        }
        let t = p.trunc();
        // the reductions additionally assume the verified tail positivity
        // the implementation insists on
        if !t
            .ring(1)
            .all(|k| mu::<f64>(k, &p).unwrap() > 0.0)
        {
            continue;
        }
        let x = common::random_candidate(&mut rng, t, 1.0, 0.8);

        // Lemma 1 reduction: sup over I_2m of the tail-column bound is
        // attained on R₂. Brute force over I_2m ∩ F_7m.
        let script_b = |q: MultiIndex| -> f64 {
            let mut acc = 8.0 * x.c00().abs() / mu::<f64>(q, &p).unwrap();
            for s1 in (1 - (m1 as i64))..(m1 as i64) {
                for s2 in (1 - (m2 as i64))..(m2 as i64) {
                    if s2 == 0 {
                        continue;
                    }
                    let v = x.sym_at(s1, s2);
                    if v == 0.0 {
                        continue;
                    }
                    let pk = MultiIndex::new(s1 + q.k1, s2 + q.k2);
                    if pk.k2 == 0 {
                        continue;
                    }
                    let m = boussinesq::problem::mu_unchecked::<f64>(pk, &p);
                    acc += 8.0 * v.abs() * p.nu.powi((s1.abs() + s2.abs()) as i32) / m;
                }
            }
            acc
        };
        let mut global: (f64, Option<MultiIndex>) = (f64::NEG_INFINITY, None);
        for q in t.scaled(7).iter_minus(t.scaled(2)) {
            let v = script_b(q);
            if v > global.0 {
                global = (v, Some(q));
            }
        }
        let mut on_ring: f64 = f64::NEG_INFINITY;
        for q in t.ring(2) {
            on_ring = on_ring.max(script_b(q));
        }
        let argmax = global.1.unwrap();
        let in_r2 = t.scaled(3).contains(argmax) && !t.scaled(2).contains(argmax);
        assert!(
            in_r2,
            "lemma 1: argmax {argmax:?} of the tail-column bound is outside R2 (params {p:?})"
        );
        assert_eq!(global.0, on_ring, "lemma 1: ring maximum differs");

        // Lemma 2 reduction: sup over I_m of μ⁻¹ is attained on R₁.
        let mut global2: (f64, Option<MultiIndex>) = (f64::NEG_INFINITY, None);
        for k in t.scaled(7).iter_minus(t) {
            let v = 1.0 / mu::<f64>(k, &p).unwrap();
            if v > global2.0 {
                global2 = (v, Some(k));
            }
        }
        let argmax2 = global2.1.unwrap();
        let in_r1 = t.scaled(2).contains(argmax2) && !t.contains(argmax2);
        assert!(
            in_r1,
            "lemma 2: argmax {argmax2:?} of mu^-1 is outside R1 (params {p:?})"
        );
        let mut on_r1: f64 = f64::NEG_INFINITY;
        for k in t.ring(1) {
            on_r1 = on_r1.max(1.0 / mu::<f64>(k, &p).unwrap());
        }
        assert_eq!(global2.0, on_r1, "lemma 2: ring maximum differs");

        accepted += 1;
    }
    println!(
        "acceptance criterion 5: PASS (both ring reductions exact on 10 random parameter triples, {:.1?})",
        t0.elapsed()
    );
}

#[test]
fn criterion_6_norm_lemmas() {
    let t0 = Instant::now();
    let nu = 1.01f64;
    let t = Trunc::new(4, 4);
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0x60a15);
    for _ in 0..1000 {
        let x = common::random_candidate(&mut rng, t, 1.0, 0.8);
        let y = common::random_candidate(&mut rng, t, 1.0, 0.8);

        // ‖sym(x)‖*_ν ≤ 4 ‖x‖_ν
        let star: f64 = t
            .iter_signed()
            .map(|k| x.sym_at(k.k1, k.k2).abs() * nu.powi(k.abs_sum() as i32))
            .sum();
        assert!(star <= 4.0 * x.norm_nu(nu) + 1e-12);

        // ‖sym(x) * sym(y)‖_ν ≤ 16 ‖x‖_ν ‖y‖_ν  (brute-force convolution)
        let (h1, h2) = (2 * (t.m1 as i64 - 1) + 1, 2 * (t.m2 as i64 - 1) + 1);
        let mut xs = x.clone();
        xs.set_c00(0.0);
        let mut ys = y.clone();
        ys.set_c00(0.0);
        let gx = common::full_c_grid(&xs, h1, h2);
        let gy = common::full_c_grid(&ys, h1, h2);
        let prod = common::full_conv(&gx, &gy, h1, h2);
        let mut lhs = Dd::ZERO;
        for k1 in 0..=h1 {
            for k2 in 1..=h2 {
                lhs = lhs
                    + prod.get(k1, k2).abs() * common::dd_nu_pow(nu, (k1 + k2) as usize);
            }
        }
        let rhs = 16.0 * x.norm_nu(nu) * y.norm_nu(nu);
        assert!(lhs.to_f64() <= rhs + 1e-10);

        // ‖c₀₀ · sym(x)‖_ν = |c₀₀| ‖x‖_ν
        let c = y.c00();
        let scaled: f64 = t
            .iter()
            .map(|k| (c * x.get(k)).abs() * nu.powi(k.abs_sum() as i32))
            .sum();
        assert!((scaled - c.abs() * x.norm_nu(nu)).abs() < 1e-12);
    }

    // the 4x bound is attained when all mass sits at k₁ > 0
    let mut x = SymCoeffs::<f64>::zeros(t);
    for k in t.iter() {
        if k.k1 > 0 {
            x.set(k, 0.25);
        }
    }
    let star: f64 = t
        .iter_signed()
        .map(|k| x.sym_at(k.k1, k.k2).abs() * nu.powi(k.abs_sum() as i32))
        .sum();
    assert!((star - 4.0 * x.norm_nu(nu)).abs() < 1e-12 && star > 0.0);
    println!(
        "acceptance criterion 6: PASS (1000 random instances, zero violations, 4x case attained, {:.1?})",
        t0.elapsed()
    );
}

#[test]
fn criterion_7_jacobian_finite_differences() {
    let t0 = Instant::now();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0x7ac0b);
    let p = Params {
        lambda: 0.17,
        l: TWO_PI,
        nu: 1.01,
        m1: 4,
        m2: 4,
    };
    let t = p.trunc();
    let range = Trunc::new(2 * t.m1 - 1, 2 * t.m2 - 1);
    let step = 1e-7;
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let x = common::random_candidate(&mut rng, t, 1.0, 0.9);
        let k = t.at(rng.random_range(0..t.len()));
        let j = t.at(rng.random_range(0..t.len()));
        let analytic = jacobian_entry(&x, k, j, &p);
        let mut xp = x.clone();
        xp.set(j, x.get(j) + step);
        let mut xm = x.clone();
        xm.set(j, x.get(j) - step);
        let fp = residual(&xp, &p, range);
        let fm = residual(&xm, &p, range);
        let slot = range.index_of(k).unwrap();
        let fd = (fp[slot] - fm[slot]) / (2.0 * step);
        let rel = (analytic - fd).abs() / analytic.abs().max(1.0);
        worst = worst.max(rel);
        assert!(
            rel < 1e-6,
            "relative error {rel:.3e} at (k={k:?}, j={j:?})"
        );
    }
    println!(
        "acceptance criterion 7: PASS (1000 probes, worst relative error {worst:.2e}, {:.1?})",
        t0.elapsed()
    );
}

#[test]
fn criterion_8_interval_containment_fuzz() {
    let t0 = Instant::now();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0x8f022);
    let mut divisions = 0usize;
    for i in 0..1_000_000usize {
        // mixed scales, widths from degenerate to wide
        let scale = 10f64.powi((rng.random::<u32>() % 13) as i32 - 6);
        let a = (rng.random::<f64>() - 0.5) * scale;
        let b = (rng.random::<f64>() - 0.5) * scale;
        let wa = rng.random::<f64>() * scale * rng.random::<f64>();
        let wb = rng.random::<f64>() * scale * rng.random::<f64>();
        let ia = Interval::new(a, a + wa).unwrap();
        let ib = Interval::new(b, b + wb).unwrap();
        let pa = a + rng.random::<f64>() * wa;
        let pb = b + rng.random::<f64>() * wb;
        let dd = |v: f64| Dd::from_f64(v);
        let inside = |iv: Interval, v: Dd| dd(iv.lo()) <= v && v <= dd(iv.hi());

        let op = i % 4;
        let ok = match op {
            0 => inside(ia + ib, dd(pa) + dd(pb)),
            1 => inside(ia - ib, dd(pa) - dd(pb)),
            2 => inside(ia * ib, dd(pa) * dd(pb)),
            _ => {
                if ib.straddles_zero() {
                    true
                } else {
                    divisions += 1;
                    inside(ia.try_div(ib).unwrap(), dd(pa) / dd(pb))
                }
            }
        };
        assert!(ok, "containment violated at trial {i} (op {op})");
    }
    println!(
        "acceptance criterion 8: PASS (10^6 sampled operations contained, {divisions} divisions, {:.1?})",
        t0.elapsed()
    );
}

#[test]
fn criterion_9_render_symmetry_and_single_mode() {
    let t0 = Instant::now();
    let p = Params {
        lambda: 0.21,
        l: TWO_PI,
        nu: 1.01,
        m1: 6,
        m2: 6,
    };
    // sampled even/even symmetry on a generic orbit-like candidate
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0x9e0de);
    let x = common::random_candidate(&mut rng, p.trunc(), 0.8, 0.8);
    let (nt, ny) = (21, 17);
    let g = eval_grid(&x, &p, nt, ny);
    for i in 0..nt {
        for j in 0..ny {
            let v = g.values[i * ny + j];
            let mirror_y = g.values[i * ny + (ny - 1 - j)];
            let mirror_t = g.values[(nt - 1 - i) * ny + j];
            assert!((v - mirror_y).abs() <= 1e-12, "y-symmetry at ({i},{j})");
            assert!((v - mirror_t).abs() <= 1e-12, "t-symmetry at ({i},{j})");
        }
    }

    // single mode: u = 4 b cos(L t) cos(2π y)
    let b = 0.37;
    let mut single = SymCoeffs::<f64>::zeros(p.trunc());
    single.set(MultiIndex::new(1, 1), b);
    let g = eval_grid(&single, &p, nt, ny);
    let mut worst: f64 = 0.0;
    for (i, &t) in g.ts.iter().enumerate() {
        for (j, &y) in g.ys.iter().enumerate() {
            let expect = 4.0 * b * (p.l * t).cos() * (TWO_PI * y).cos();
            worst = worst.max((g.values[i * ny + j] - expect).abs());
        }
    }
    assert!(worst <= 1e-12, "single-mode formula off by {worst:.3e}");
    println!(
        "acceptance criterion 9: PASS (grid symmetry and single-mode formula to 1e-12, worst {worst:.2e}, {:.1?})",
        t0.elapsed()
    );
}
