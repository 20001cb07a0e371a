//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use proptest::test_runner::{Config, TestCaseError, TestRunner};
use specdesign::cli::{Artifacts, ARTIFACT_FILES, EXIT_PASS};
use specdesign::darboux::{self, FirstOrderBuild};
use specdesign::expalg::ExpPoly;
use specdesign::linalg;
use specdesign::matfun::{RatMatFun, VecFun};
use specdesign::model::{self, ChainEntry, TransformationSet, Verdict};
use specdesign::scenarios::{self, oracles, Instance, ScenarioConfig, ScenarioId};
use specdesign::spectra::{self, ModeKind, Sign};
use specdesign::verify::{self, probe_basis, Report};
use specdesign::C64;

type Outcome = Result<String, String>;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn build_draw(id: ScenarioId, seed: u64) -> Result<(Instance, FirstOrderBuild), String> {
    let cfg = scenarios::random_config(id, seed).map_err(|e| e.to_string())?;
    let inst = scenarios::instantiate(&cfg).map_err(|e| e.to_string())?;
    let b = scenarios::build(&inst).map_err(|e| e.to_string())?;
    Ok((inst, b))
}

fn build_cfg(cfg: &ScenarioConfig) -> Result<(Instance, FirstOrderBuild), String> {
    let inst = scenarios::instantiate(cfg).map_err(|e| e.to_string())?;
    let b = scenarios::build(&inst).map_err(|e| e.to_string())?;
    Ok((inst, b))
}

/// Builds shared between criteria, filled on first use.
#[derive(Default)]
struct Shared {
    s52: Vec<(Instance, FirstOrderBuild)>,
    scenario_builds: Vec<(ScenarioId, u64, Instance, FirstOrderBuild, Report)>,
}

fn s52_draws(shared: &mut Shared) -> Result<&[(Instance, FirstOrderBuild)], String> {
    if shared.s52.is_empty() {
        shared.s52 = (0..20).map(|s| build_draw(ScenarioId::S52, 200 + s)).collect::<Result<_, _>>()?;
    }
    Ok(&shared.s52)
}

fn case1() -> Outcome {
    let (k1, k2, x0) = (c(1.0, 0.0), c(2.0, 0.0), 0.7);
    let (_, b) = build_cfg(&scenarios::s51_partial_case1(k1, k2, x0))?;
    let want = oracles::s51::case1_v_minus(k1, k2, x0);
    let mut worst = 0.0f64;
    for x in scenarios::Grid::default().points() {
        let d = b.h_minus.potential.eval(x) - want.eval(x);
        worst = d.iter().fold(worst, |m, z| m.max(z.norm()));
    }
    ensure(worst <= 1e-10, || format!("max |V- - oracle| = {worst:e}"))?;
    let u0 =
        RatMatFun::from_const(&linalg::from_rows(&[vec![c(-1.0, 0.0), c(0.0, 0.0)], vec![c(0.0, 0.0), c(-4.0, 0.0)]]));
    ensure(b.u0.sub(&u0).is_zero(), || "U0 differs from diag(-1, -4)".into())?;
    Ok(format!("max |V- - oracle| = {worst:.1e}, U0 = diag(-1, -4)"))
}

fn s52_u0(shared: &mut Shared) -> Outcome {
    let draws = s52_draws(shared)?;
    for (i, (inst, b)) in draws.iter().enumerate() {
        let k = inst.params.as_ref().unwrap().k();
        let shift = RatMatFun::from_const(&(linalg::identity(2) * (k * k)));
        ensure(b.u0.add(&shift).is_zero(), || format!("draw {i}: U0 + k^2 I is not zero"))?;
    }
    Ok(format!("{} draws", draws.len()))
}

fn s52_reverse(shared: &mut Shared) -> Outcome {
    let draws = s52_draws(shared)?;
    for (i, (inst, b)) in draws.iter().enumerate() {
        let f = darboux::factorization_report(b, &inst.h_plus);
        ensure(f.reverse_intertwining == Some(true), || format!("draw {i}: {:?}", f.reverse_intertwining))?;
    }
    Ok(format!("{} draws", draws.len()))
}

fn kernel_and_intertwining(shared: &mut Shared) -> Outcome {
    let mut count = 0;
    for id in ScenarioId::BUNDLED {
        for seed in 300..310 {
            let (inst, b) = build_draw(id, seed)?;
            let rep = verify::verify_build(&b, &inst).map_err(|e| e.to_string())?;
            let relevant: Vec<_> = rep
                .checks
                .iter()
                .filter(|ch| ch.name.starts_with("kernel.") || ch.name.starts_with("intertwining."))
                .collect();
            ensure(relevant.iter().any(|ch| ch.name == "intertwining.probes"), || "probe check missing".into())?;
            if let Some(bad) = relevant.iter().find(|ch| !ch.exact) {
                return Err(format!("{} seed {seed}: {} residual {:e}", id.name(), bad.name, bad.residual));
            }
            count += relevant.len();
            shared.scenario_builds.push((id, seed, inst, b, rep));
        }
    }
    Ok(format!("{} builds, {count} exact checks", shared.scenario_builds.len()))
}

fn u0_routes_and_commutator(shared: &mut Shared) -> Outcome {
    let mut reports: Vec<(String, Report)> = shared
        .scenario_builds
        .iter()
        .map(|(id, seed, _, _, rep)| (format!("{} seed {seed}", id.name()), rep.clone()))
        .collect();
    for (i, (inst, b)) in s52_draws(shared)?.iter().enumerate() {
        reports.push((format!("s52 draw {i}"), verify::verify_build(b, inst).map_err(|e| e.to_string())?));
    }
    let (inst, b) = build_cfg(&scenarios::s51_partial_case1(c(1.0, 0.0), c(2.0, 0.0), 0.7))?;
    reports.push(("s51 case 1".into(), verify::verify_build(&b, &inst).map_err(|e| e.to_string())?));
    ensure(reports.len() > 1, || "no builds".into())?;
    for (what, rep) in &reports {
        for name in ["u0.two_routes", "factorization.commutator"] {
            let ch = rep.get(name).ok_or_else(|| format!("{what}: {name} missing"))?;
            ensure(ch.exact, || format!("{what}: {name} residual {:e}", ch.residual))?;
        }
    }
    Ok(format!("{} builds", reports.len()))
}

fn inverse_problem() -> Outcome {
    let mut sets = Vec::new();
    for id in ScenarioId::BUNDLED {
        for seed in 0..3 {
            let inst = scenarios::instantiate(&scenarios::random_config(id, 400 + seed).map_err(|e| e.to_string())?)
                .map_err(|e| e.to_string())?;
            let p = inst.params.ok_or("missing params")?;
            sets.push((
                format!("{} seed {seed}", id.name()),
                scenarios::transformation_set(id, &p).map_err(|e| e.to_string())?,
            ));
        }
    }
    for (what, set) in &sets {
        let h = model::potential_from_set(set).map_err(|e| format!("{what}: {e}"))?;
        ensure(h.potential.is_zero(), || format!("{what}: V+ is not zero"))?;
    }
    // phi = x e^{kx} with n = 1: W = x e^{kx} vanishes at the origin.
    let k = c(1.0, 0.0);
    let pole = TransformationSet::new(
        1,
        vec![ChainEntry { phi: VecFun::new(vec![ExpPoly::term(c(1.0, 0.0), 1, k)]), lambda: k * k, sigma: 0 }],
    )
    .map_err(|e| e.to_string())?;
    let h = model::potential_from_set(&pole).map_err(|e| e.to_string())?;
    let w = model::check_nonvanishing(&h.potential.den, (-5.0, 5.0), 1001, model::NONVANISHING_TOL)
        .map_err(|e| e.to_string())?;
    ensure(w.verdict == Verdict::Fail, || format!("pole example verdict {:?}", w.verdict))?;
    Ok(format!("{} sets give V+ = 0; pole example fails near x = {}", sets.len(), w.at))
}

fn jordan_chain() -> Outcome {
    for seed in 0..5 {
        let (inst, b) = build_draw(ScenarioId::S53, 500 + seed)?;
        let rep = verify::verify_scenario_oracles(&b, &inst).map_err(|e| e.to_string())?;
        for name in ["chain.associated", "chain.second_power", "chain.trimmed_eigenfunction"] {
            let ch = rep.get(name).ok_or_else(|| format!("{name} missing"))?;
            ensure(ch.exact, || format!("seed {seed}: {name} {:?}", ch.location))?;
        }
    }
    Ok("5 draws".into())
}

fn truth_tables() -> Outcome {
    let mut branches = 0;
    for id in ScenarioId::BUNDLED {
        for label in scenarios::branch_labels(id) {
            let cfg = scenarios::sample_branch(id, label, 900).map_err(|e| format!("{}:{label}: {e}", id.name()))?;
            let t = scenarios::check_truth_table(&cfg).map_err(|e| format!("{}:{label}: {e}", id.name()))?;
            ensure(t.branch == label && t.agrees, || {
                format!("{}:{label} disagrees (sampled {})", id.name(), t.branch)
            })?;
            branches += 1;
        }
    }
    Ok(format!("{branches} branches"))
}

fn order_n() -> Outcome {
    // Four free eigenfunctions, each mixing both channels.
    let modes = [
        (c(1.0, 0.0), Sign::Plus, c(0.5, 0.0)),
        (c(1.5, 0.0), Sign::Minus, c(-0.8, 0.3)),
        (c(0.6, 0.0), Sign::Minus, c(1.2, 0.0)),
        (c(2.0, 0.0), Sign::Plus, c(0.4, -0.2)),
    ];
    let mut entries = Vec::new();
    for (k, sign, mix) in modes {
        let a = spectra::free_modes(2, k, 0, ModeKind::Eigen, sign).map_err(|e| e.to_string())?;
        let b = spectra::free_modes(2, k, 1, ModeKind::Eigen, sign).map_err(|e| e.to_string())?;
        entries.push(ChainEntry { phi: a.num.add(&b.num.scale(mix)), lambda: -k * k, sigma: 0 });
    }
    let set = TransformationSet::new(2, entries).map_err(|e| e.to_string())?;
    let w = model::wronskian(&set, 2).map_err(|e| e.to_string())?;
    let nv = model::check_nonvanishing(&w, (-5.0, 5.0), 1001, model::NONVANISHING_TOL).map_err(|e| e.to_string())?;
    ensure(nv.verdict == Verdict::Pass, || format!("W check {:?}", nv.verdict))?;
    let free = model::Hamiltonian::free(2);
    let ob = darboux::build_order_n(&set, &linalg::identity(2), &free).map_err(|e| e.to_string())?;
    let rep = verify::verify_intertwining(&ob.q, &free, &ob.h_minus, &probe_basis(2)).map_err(|e| e.to_string())?;
    ensure(rep.overall, || format!("order-2 build: {:?}", rep.failures().map(|ch| &ch.name).collect::<Vec<_>>()))?;

    // Generic s51 instance: complex rates and every constant nonzero.
    let cfg = ScenarioConfig::new(ScenarioId::S51)
        .with("k1", c(1.3, 0.2))
        .with("k2", c(0.7, -0.1))
        .with("C2", c(0.6, 0.1))
        .with("C3", c(-0.4, 0.3))
        .with("C4", c(0.9, 0.0))
        .with("C5", c(0.5, -0.2))
        .with("C6", c(-0.7, 0.4))
        .with("C7", c(0.3, 0.6))
        .with("C8", c(1.1, -0.3));
    let (inst, b) = build_cfg(&cfg)?;
    let p = inst.params.ok_or("missing params")?;
    let rev = scenarios::s51_reverse(&b, &p).map_err(|e| e.to_string())?;
    ensure(rev.q.order == 3, || format!("reverse order {}", rev.q.order))?;
    ensure(rev.h_minus.potential.is_zero(), || "reverse build: V+ is not zero".into())?;
    Ok("order-2 intertwining exact; reverse third-order build gives V+ = 0".into())
}

fn dependence_relations() -> Outcome {
    let mut n = 0;
    for id in ScenarioId::BUNDLED {
        for seed in 0..4 {
            let (inst, b) = build_draw(id, 600 + seed)?;
            let p = inst.params.ok_or("missing params")?;
            for rel in scenarios::relations(id, &p) {
                let ok = scenarios::relation_holds(&b, id, &p, &rel).map_err(|e| e.to_string())?;
                ensure(ok, || format!("{} seed {seed}: relation {} is not zero", id.name(), rel.name))?;
                n += 1;
            }
        }
    }
    Ok(format!("{n} relations"))
}

fn runner(cases: u32) -> TestRunner {
    TestRunner::new(Config { cases, failure_persistence: None, ..Config::default() })
}

fn property_suites() -> Outcome {
    use common::*;
    let fail = |e: String| TestCaseError::fail(e);
    runner(1000)
        .run(&(poly(4), poly(4), poly(4)), |(a, b, cc)| ring_case(&a, &b, &cc).map_err(fail))
        .map_err(|e| format!("ring: {e}"))?;
    runner(1000)
        .run(&(poly(4), poly(4)), |(a, b)| product_rule_case(&a, &b).map_err(fail))
        .map_err(|e| format!("product rule: {e}"))?;
    runner(1000)
        .run(&(poly(4), poly(4), -3.0..3.0f64), |(a, b, x)| eval_case(&a, &b, x).map_err(fail))
        .map_err(|e| format!("eval homomorphism: {e}"))?;
    runner(100).run(&matrix(3, 3), |m| det_case(&m).map_err(fail)).map_err(|e| format!("determinant: {e}"))?;
    Ok("3 x 1000 algebra cases, 100 determinants".into())
}

fn run_cli(args: &[&str]) -> Result<(i32, Vec<u8>), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_specdesign")).args(args).output().map_err(|e| e.to_string())?;
    Ok((out.status.code().unwrap_or(-1), out.stdout))
}

fn read_dir_files(dir: &Path) -> Result<Vec<Vec<u8>>, String> {
    ARTIFACT_FILES.iter().map(|f| std::fs::read(dir.join(f)).map_err(|e| format!("{f}: {e}"))).collect()
}

fn cli_round_trip() -> Outcome {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let (d1, d2) = (tmp.path().join("a"), tmp.path().join("b"));
    for d in [&d1, &d2] {
        let (code, _) = run_cli(&["build", "--scenario", "s52", "--seed", "11", "--out", d.to_str().unwrap()])?;
        ensure(code == EXIT_PASS, || format!("build exited {code}"))?;
    }
    let (f1, f2) = (read_dir_files(&d1)?, read_dir_files(&d2)?);
    ensure(f1 == f2, || "two builds with the same seed differ".into())?;
    let a = Artifacts::read(&d1).map_err(|e| e.to_string())?;
    let reser: Vec<Vec<u8>> = a.files().into_iter().map(|(_, s)| s.into_bytes()).collect();
    ensure(reser == f1, || "deserialize/serialize changes the bytes".into())?;
    let (c1, r1) = run_cli(&["verify", d1.to_str().unwrap()])?;
    let (c2, r2) = run_cli(&["verify", d1.to_str().unwrap()])?;
    ensure(c1 == EXIT_PASS && c2 == EXIT_PASS, || format!("verify exited {c1}/{c2}"))?;
    ensure(r1 == r2, || "verify reports differ between runs".into())?;
    ensure(r1 == f1[5], || "re-verified report differs from report.json".into())?;
    Ok(format!("{} files byte-stable", ARTIFACT_FILES.len()))
}

fn main() {
    let mut shared = Shared::default();
    let mut failed = 0;
    let mut run = |n: u32, title: &str, limit: Option<f64>, f: &mut dyn FnMut(&mut Shared) -> Outcome| {
        let t = Instant::now();
        let r = catch_unwind(AssertUnwindSafe(|| f(&mut shared))).unwrap_or_else(|p| {
            let msg = p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panic: {}", msg.unwrap_or_default()))
        });
        let secs = t.elapsed().as_secs_f64();
        let r = match (r, limit) {
            (Ok(_), Some(l)) if secs > l => Err(format!("took {secs:.2} s, limit {l} s")),
            (r, _) => r,
        };
        let (tag, detail) = match &r {
            Ok(d) => ("PASS", d.clone()),
            Err(d) => ("FAIL", d.clone()),
        };
        if r.is_err() {
            failed += 1;
        }
        println!("{tag} [{n:2}] {title} ({secs:.2} s): {detail}");
    };
    run(1, "partial case 1: V- and U0", Some(1.0), &mut |_| case1());
    run(2, "s52: U0 = -k^2 I", Some(5.0), &mut s52_u0);
    run(3, "s52: reverse intertwining", None, &mut s52_reverse);
    run(4, "kernel and intertwining identities", Some(30.0), &mut kernel_and_intertwining);
    run(5, "two-route U0 and commutator identity", None, &mut u0_routes_and_commutator);
    run(6, "inverse problem", None, &mut |_| inverse_problem());
    run(7, "Jordan chain mapping", None, &mut |_| jordan_chain());
    run(8, "normalizability truth tables", Some(60.0), &mut |_| truth_tables());
    run(9, "order-N builds", Some(10.0), &mut |_| order_n());
    run(10, "dependence relations", None, &mut |_| dependence_relations());
    run(11, "property suites", None, &mut |_| property_suites());
    run(12, "CLI round trip and determinism", None, &mut |_| cli_round_trip());
    println!("{} of 12 criteria passed", 12 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
