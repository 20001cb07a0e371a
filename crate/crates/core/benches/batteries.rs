use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use specdesign::darboux::FirstOrderBuild;
use specdesign::matfun::RatVecFun;
use specdesign::model::Hamiltonian;
use specdesign::scenarios::{self, Instance, ScenarioId};
use specdesign::{par, verify};

type Probe = (String, RatVecFun);
type Battery = fn(&[Probe], &(dyn Fn(&Probe) -> bool + Sync)) -> Vec<bool>;

fn setup(id: ScenarioId) -> (Instance, FirstOrderBuild) {
    let inst = scenarios::instantiate(&scenarios::random_config(id, 1).unwrap()).unwrap();
    let b = scenarios::build(&inst).unwrap();
    (inst, b)
}

/// `Q (H+ phi) - H- (Q phi)` over the probe basis, exact zero test per probe.
fn probe_residuals(b: &FirstOrderBuild, hp: &Hamiltonian, probes: &[Probe], map: Battery) -> usize {
    let ok = map(probes, &|(_, phi)| {
        let lhs = b.q_minus.apply(&hp.apply(phi).unwrap()).unwrap();
        let rhs = b.h_minus.apply(&b.q_minus.apply(phi).unwrap()).unwrap();
        lhs.sub(&rhs).is_zero()
    });
    ok.into_iter().filter(|z| *z).count()
}

fn parallel(items: &[Probe], f: &(dyn Fn(&Probe) -> bool + Sync)) -> Vec<bool> {
    par::map(items, f)
}

fn sequential(items: &[Probe], f: &(dyn Fn(&Probe) -> bool + Sync)) -> Vec<bool> {
    par::map_seq(items, f)
}

fn batteries(c: &mut Criterion) {
    let probes = verify::probe_basis(2);
    let mut g = c.benchmark_group("probe_intertwining");
    for id in ScenarioId::BUNDLED {
        let (inst, b) = setup(id);
        g.bench_with_input(BenchmarkId::new("parallel", id.name()), &b, |bn, b| {
            bn.iter(|| black_box(probe_residuals(b, &inst.h_plus, &probes, parallel)))
        });
        g.bench_with_input(BenchmarkId::new("sequential", id.name()), &b, |bn, b| {
            bn.iter(|| black_box(probe_residuals(b, &inst.h_plus, &probes, sequential)))
        });
    }
    g.finish();

    let mut g = c.benchmark_group("verify_build");
    g.sample_size(10);
    for id in ScenarioId::BUNDLED {
        let (inst, b) = setup(id);
        g.bench_function(id.name(), |bn| bn.iter(|| black_box(verify::verify_build(&b, &inst).unwrap().overall)));
    }
    g.finish();
}

criterion_group!(benches, batteries);
criterion_main!(benches);
