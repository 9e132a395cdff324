use proptest::prelude::*;
use stylemill_core::dataset::assemble_dataset;
use stylemill_core::eval::{auc_roc, cross_validate, paired_t_test, ratio_sweep, CvOptions, Metric, ProtocolOptions};
use stylemill_core::features::{build_profiles, EventField, FeatureMapping, LogEvent, MappingRule};
use stylemill_core::learners::{fit, Classifier, Schema};
use stylemill_core::sampling::{choose_labeled, make_folds, split_labeled_unlabeled, under_sample_indices, SplitSpec};
use stylemill_core::semisup::{self_train, tri_train, LabelingConfig, TriTrainOptions};
use stylemill_core::style::{label_response, IlsResponse};
use stylemill_core::synth::{generate, SynthSpec};
use stylemill_core::{Dimension, ModelKind, Pole, TrainConfig};

struct Ev(&'static str, &'static str, &'static str);

impl LogEvent for Ev {
    fn user_id(&self) -> &str {
        self.0
    }
    fn event_name(&self) -> &str {
        self.1
    }
    fn component(&self) -> &str {
        self.2
    }
    fn event_context(&self) -> &str {
        ""
    }
}

fn rule(contains: &str, feature: &str) -> MappingRule {
    MappingRule {
        field: EventField::Component,
        contains: contains.into(),
        feature: feature.into(),
    }
}

#[test]
fn events_to_labeled_dataset() {
    let mapping = FeatureMapping {
        feature_names: vec!["video".into(), "quiz".into()],
        rules: vec![rule("youtube", "video"), rule("quiz", "quiz")],
    };
    let events = [
        Ev("s1", "Course module viewed", "YouTube"),
        Ev("s1", "Quiz attempt started", "Quiz"),
        Ev("s2", "Quiz attempt started", "Quiz"),
        Ev("s2", "Course viewed", "System"),
    ];
    let profiles = build_profiles(&events, &mapping).unwrap();
    let sheet = IlsResponse::parse(&"a".repeat(44)).unwrap();
    let labels = vec![
        ("s1".to_string(), label_response(&sheet).to_vec()),
        ("ghost".to_string(), label_response(&sheet).to_vec()),
    ];
    let (ds, report) = assemble_dataset(mapping.feature_names.clone(), &profiles, &labels).unwrap();
    assert_eq!(ds.len(), 2);
    assert_eq!(report.rejected_user_ids, ["ghost"]);
    assert_eq!(ds.features(), vec![vec![1.0, 1.0], vec![0.0, 1.0]]);
    for dim in Dimension::ALL {
        assert_eq!(ds.class_counts(dim), (1, 0));
        assert_eq!(ds.unlabeled_indices(dim), [1]);
    }
}

#[test]
fn synthetic_pipeline_beats_chance_for_every_learner() {
    let g = generate(&SynthSpec {
        n_students: 200,
        separation: 1.0,
        seed: 3,
        ..SynthSpec::default()
    })
    .unwrap();
    for kind in ModelKind::ALL {
        let options = CvOptions {
            k: 5,
            seed: 1,
            ..CvOptions::default()
        };
        let report = cross_validate(&g.dataset, Dimension::Input, kind, &TrainConfig::default(), &options).unwrap();
        let acc = report.summary[&Metric::Accuracy].mean;
        assert!(acc > 0.75, "{kind:?}: {acc}");
        assert_eq!(report.folds.len(), 5);
    }
}

#[test]
fn self_training_then_tri_training_on_one_split() {
    let g = generate(&SynthSpec {
        n_students: 150,
        seed: 8,
        ..SynthSpec::default()
    })
    .unwrap();
    let (l, u, withheld) = split_labeled_unlabeled(&g.dataset, Dimension::Input, &SplitSpec::new(0.2, 4)).unwrap();
    assert_eq!(l.len(), 30);
    assert_eq!(withheld.labels.len(), 120);
    let run = self_train(
        &l,
        &u,
        Dimension::Input,
        &LabelingConfig::default(),
        ModelKind::NaiveBayes,
        &TrainConfig::default(),
    )
    .unwrap();
    assert_eq!(run.d_prime.len(), 150);
    let truth = withheld.reattach(&u);
    let (ux, uy) = truth.labeled_xy(Dimension::Input);
    let st = run.final_model.predict(&ux).unwrap();
    let st_acc = st.poles.iter().zip(&uy).filter(|(a, b)| a == b).count() as f64 / uy.len() as f64;
    assert!(st_acc > 0.6, "{st_acc}");

    let tri = tri_train(
        &l,
        &u,
        Dimension::Input,
        &TriTrainOptions::uniform(ModelKind::NaiveBayes, TrainConfig::default(), 2),
    )
    .unwrap();
    let tri_pred = tri.predict(&ux).unwrap();
    assert!(tri_pred
        .scores
        .iter()
        .all(|s| [-1.0, -1.0 / 3.0, 1.0 / 3.0, 1.0].contains(s)));
}

#[test]
fn sweep_report_is_reproducible() {
    let g = generate(&SynthSpec {
        n_students: 120,
        seed: 1,
        ..SynthSpec::default()
    })
    .unwrap();
    let opts = ProtocolOptions {
        folds: 3,
        ..ProtocolOptions::default()
    };
    let run = || {
        ratio_sweep(
            &g.dataset,
            Dimension::Input,
            &[0.2, 1.0],
            &[ModelKind::NaiveBayes],
            &[5],
            &opts,
        )
        .unwrap()
    };
    let a = run();
    assert_eq!(a, run());
    assert_eq!(a.rows.len(), 2);
    let full = &a.rows[1];
    assert_eq!(full.ratio, 1.0);
    assert_eq!(full.n_hidden, 0);
    assert_eq!(full.baseline, full.self_training);
}

#[test]
fn fitted_models_survive_serde() {
    let g = generate(&SynthSpec {
        n_students: 80,
        seed: 2,
        ..SynthSpec::default()
    })
    .unwrap();
    let (x, y) = g.dataset.labeled_xy(Dimension::Input);
    let schema = Schema::new(g.dataset.feature_names.clone(), Some(Dimension::Input));
    for kind in ModelKind::ALL {
        let model = fit(kind, &TrainConfig::default(), &schema, &x, &y).unwrap();
        let text = serde_json::to_string(&model).unwrap();
        let back: stylemill_core::TrainedModel = serde_json::from_str(&text).unwrap();
        assert_eq!(model.predict(&x).unwrap(), back.predict(&x).unwrap(), "{kind:?}");
    }
}

fn poles() -> impl Strategy<Value = Vec<Pole>> {
    prop::collection::vec(
        prop::bool::ANY.prop_map(|b| if b { Pole::First } else { Pole::Second }),
        2..60,
    )
}

proptest! {
    #[test]
    fn under_sampling_balances(labels in poles(), seed in any::<u64>()) {
        let first = labels.iter().filter(|p| **p == Pole::First).count();
        prop_assume!(first > 0 && first < labels.len());
        let keep = under_sample_indices(&labels, seed).unwrap();
        let kept_first = keep.iter().filter(|&&i| labels[i] == Pole::First).count();
        prop_assert_eq!(kept_first * 2, keep.len());
        prop_assert_eq!(kept_first, first.min(labels.len() - first));
    }

    #[test]
    fn folds_partition_rows(labels in poles(), k in 2usize..6, seed in any::<u64>()) {
        prop_assume!(k <= labels.len());
        let plan = make_folds(labels.len(), k, Some(&labels), seed).unwrap();
        let mut seen = vec![0; labels.len()];
        for f in 0..k {
            for i in plan.test_indices(f) {
                seen[i] += 1;
            }
            prop_assert_eq!(plan.train_indices(f).len() + plan.test_indices(f).len(), labels.len());
        }
        prop_assert!(seen.iter().all(|&c| c == 1));
    }

    #[test]
    fn labeled_choice_is_a_subset(labels in poles(), r in 0.01f64..=1.0, seed in any::<u64>()) {
        prop_assume!(r * labels.len() as f64 >= 1.0);
        let chosen = choose_labeled(&labels, &SplitSpec::new(r, seed)).unwrap();
        let mut sorted = chosen.clone();
        sorted.sort_unstable();
        sorted.dedup();
        prop_assert_eq!(sorted.len(), chosen.len());
        prop_assert!(chosen.iter().all(|&i| i < labels.len()));
        if r == 1.0 {
            prop_assert_eq!(chosen.len(), labels.len());
        }
    }

    #[test]
    fn auc_flips_under_negation(labels in poles(), raw in prop::collection::vec(-5i32..5, 60)) {
        prop_assume!(labels.contains(&Pole::First) && labels.contains(&Pole::Second));
        let scores: Vec<f64> = raw[..labels.len()].iter().map(|&s| s as f64).collect();
        let neg: Vec<f64> = scores.iter().map(|s| -s).collect();
        let a = auc_roc(&scores, &labels).unwrap();
        let b = auc_roc(&neg, &labels).unwrap();
        prop_assert!((a + b - 1.0).abs() < 1e-12);
    }

    #[test]
    fn t_test_is_antisymmetric(a in prop::collection::vec(0.0f64..1.0, 3..20), shift in 0.01f64..0.5) {
        let b: Vec<f64> = a.iter().enumerate().map(|(i, v)| v + shift + (i as f64) * 1e-3).collect();
        let ab = paired_t_test(&a, &b).unwrap();
        let ba = paired_t_test(&b, &a).unwrap();
        prop_assert!((ab.t_value + ba.t_value).abs() < 1e-9);
        prop_assert!((ab.p_value - ba.p_value).abs() < 1e-12);
        prop_assert!(ab.t_value < 0.0);
    }
}
