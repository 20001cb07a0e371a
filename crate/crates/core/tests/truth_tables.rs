use specdesign::scenarios::{self, ScenarioId};

#[test]
fn every_branch_agrees_with_classifier_and_norm_estimate() {
    let mut failures = Vec::new();
    for id in ScenarioId::BUNDLED {
        for label in scenarios::branch_labels(id) {
            for seed in 0..3 {
                let cfg = scenarios::sample_branch(id, label, 500 + seed).unwrap();
                let check = scenarios::check_truth_table(&cfg).unwrap();
                assert_eq!(check.branch, label);
                if !check.agrees {
                    failures.push(format!(
                        "{}:{label} seed {seed}: {:?}",
                        id.name(),
                        check
                            .levels
                            .iter()
                            .map(|l| (
                                l.expected,
                                l.counted,
                                l.states
                                    .iter()
                                    .map(|s| (s.label.clone(), s.expected, s.verdict, s.numerically_bounded))
                                    .collect::<Vec<_>>()
                            ))
                            .collect::<Vec<_>>()
                    ));
                }
            }
        }
    }
    assert!(failures.is_empty(), "{}", failures.join("\n"));
}
