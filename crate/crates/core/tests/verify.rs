use specdesign::matfun::RatMatFun;
use specdesign::model::IntertwiningOperator;
use specdesign::scenarios::{self, ScenarioId};
use specdesign::verify::{self, probe_basis};
use specdesign::C64;

#[test]
fn scenario_builds_pass_every_check() {
    for id in ScenarioId::BUNDLED {
        for seed in 0..3 {
            let inst = scenarios::instantiate(&scenarios::random_config(id, 40 + seed).unwrap()).unwrap();
            let b = scenarios::build(&inst).unwrap();
            let rep = verify::verify_build(&b, &inst).unwrap();
            let bad: Vec<_> = rep.failures().collect();
            assert!(rep.overall, "{} seed {seed}: {bad:?}", id.name());
            assert!(rep.checks.iter().all(|c| c.residual <= 1e-9));
            let non_member = rep.get("kernel.extra.e^(3kx) e0").unwrap();
            assert!(!non_member.exact);
        }
    }
}

#[test]
fn reverse_intertwining_reported_for_s52() {
    let inst = scenarios::instantiate(&scenarios::random_config(ScenarioId::S52, 7).unwrap()).unwrap();
    let b = scenarios::build(&inst).unwrap();
    let rep = verify::verify_factorization(&b, &inst.h_plus);
    assert!(rep.get("factorization.reverse").unwrap().exact);
    assert!(rep.get("u0.constant").unwrap().exact);
}

#[test]
fn first_partial_case_has_constant_u0() {
    let cfg = scenarios::s51_partial_case1(C64::new(1.0, 0.0), C64::new(2.0, 0.0), 0.7);
    let inst = scenarios::instantiate(&cfg).unwrap();
    let b = scenarios::build(&inst).unwrap();
    let rep = verify::verify_build(&b, &inst).unwrap();
    assert!(rep.overall, "{:?}", rep.failures().collect::<Vec<_>>());
    assert!(rep.get("u0.constant").unwrap().exact);
}

#[test]
fn perturbed_superpotential_is_flagged() {
    let inst =
        scenarios::instantiate(&scenarios::s51_partial_case1(C64::new(1.0, 0.0), C64::new(2.0, 0.0), 0.7)).unwrap();
    let b = scenarios::build(&inst).unwrap();
    let mut x0 = b.q_minus.lower[0].clone();
    let shift = RatMatFun::from_const(&nalgebra::DMatrix::from_fn(2, 2, |i, j| {
        if (i, j) == (0, 1) {
            C64::new(1e-3, 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    }));
    x0 = x0.add(&shift);
    let q = IntertwiningOperator::new(b.q_minus.leading.clone(), vec![x0]).unwrap();
    let rep = verify::verify_intertwining(&q, &inst.h_plus, &b.h_minus, &probe_basis(2)).unwrap();
    assert!(!rep.overall);
    let probes = rep.get("intertwining.probes").unwrap();
    assert!(!probes.exact && probes.residual > 1e-6, "{probes:?}");
    assert!(!probes.location.is_empty());
}

#[test]
fn reports_are_deterministic() {
    let run = || {
        let inst = scenarios::instantiate(&scenarios::random_config(ScenarioId::S53, 3).unwrap()).unwrap();
        let b = scenarios::build(&inst).unwrap();
        serde_json::to_string(&verify::verify_build(&b, &inst).unwrap()).unwrap()
    };
    assert_eq!(run(), run());
}
