mod common;

use std::collections::hash_map::DefaultHasher;
use std::hash::{Hash, Hasher};

use lcr_rot::corpus::load_examples;
use lcr_rot::embeddings::EmbeddingTable;
use lcr_rot::math::Tensor;
use lcr_rot::model::{EmbeddedExample, Mode, Model, ModelConfig, Variant};
use lcr_rot::rng::{self, streams};
use lcr_rot::training::{batch_gradients, load_checkpoint, save_checkpoint, train, Checkpoint, Hyperparams, Regularization};
use proptest::prelude::*;

use common::{data, random_example, randomize};

// Variants allocate only the parameters they read, so no parameter is
// structurally exempt.
#[test]
fn every_parameter_receives_gradient() {
    for variant in Variant::ALL {
        let mut rng = rng::seeded(9);
        let mut model = Model::new(ModelConfig::new(variant, 4, 3), &mut rng).unwrap();
        randomize(&mut model, 0.5, &mut rng);
        let batch: Vec<EmbeddedExample> = (0..8).map(|i| random_example(&mut rng, 4, 1 + i % 3, 1 + i % 2, 1 + i % 4)).collect();
        let refs: Vec<&EmbeddedExample> = batch.iter().collect();
        let g = batch_gradients(&model, &refs, Regularization::NONE, None).unwrap();
        for (p, grad) in model.params().iter().zip(&g.grads) {
            assert!(grad.data().iter().any(|&x| x != 0.0), "{variant}: {} has zero gradient", p.name);
        }
    }
}

#[test]
fn right_context_does_not_reach_left_components() {
    let mut rng = rng::seeded(10);
    for variant in [Variant::LcrRot, Variant::NoTargetAttention, Variant::NoTargetLearned, Variant::NoAttention] {
        let mut model = Model::new(ModelConfig::new(variant, 4, 3), &mut rng).unwrap();
        randomize(&mut model, 1.0, &mut rng);
        let ex = random_example(&mut rng, 4, 3, 2, 3);
        let mut other = ex.clone();
        other.right = (0..5).map(|_| Tensor::uniform(&[4], 1.0, &mut rng)).collect();
        let (_, a) = model.predict_proba(&ex).unwrap();
        let (_, b) = model.predict_proba(&other).unwrap();
        assert_eq!(a.rep_left, b.rep_left, "{variant}");
        assert_eq!(a.alpha_left, b.alpha_left, "{variant}");
        assert_eq!(a.rep_target_left, b.rep_target_left, "{variant}");
        assert_ne!(a.rep_right, b.rep_right, "{variant}");
    }
}

fn hash_table(t: &EmbeddingTable) -> u64 {
    let mut h = DefaultHasher::new();
    for v in t.matrix() {
        v.to_bits().hash(&mut h);
    }
    h.finish()
}

#[test]
fn training_leaves_embeddings_untouched() {
    let examples = load_examples(&std::fs::read_to_string(data("synthetic_train.txt")).unwrap()).unwrap();
    let mut table = EmbeddingTable::new(6);
    let embedded = EmbeddedExample::embed_all(&examples, &mut table, &mut rng::stream(1, streams::EMBEDDINGS));
    let before = (hash_table(&table), embedded.clone());
    let hp = Hyperparams {
        max_epochs: 3,
        batch_size: 5,
        ..Hyperparams::default()
    };
    train(&embedded, None, ModelConfig::new(Variant::LcrRot, 6, 3), &hp).unwrap();
    assert_eq!(hash_table(&table), before.0);
    assert_eq!(embedded, before.1);
}

#[test]
fn checkpoint_reload_reproduces_forward_pass() {
    let mut rng = rng::seeded(12);
    let dir = tempfile::tempdir().unwrap();
    for variant in Variant::ALL {
        let model = Model::new(ModelConfig::new(variant, 5, 4), &mut rng).unwrap();
        let ex = random_example(&mut rng, 5, 2, 3, 1);
        let path = dir.path().join(format!("{variant}.ck"));
        save_checkpoint(&path, &Checkpoint::new(model.clone(), Hyperparams::default(), None)).unwrap();
        let loaded = load_checkpoint(&path).unwrap();
        loaded.expect_variant(variant).unwrap();
        assert_eq!(model.predict_proba(&ex).unwrap(), loaded.model.predict_proba(&ex).unwrap());
    }
}

#[test]
fn eval_mode_ignores_dropout_rng() {
    let mut rng = rng::seeded(13);
    let model = Model::new(ModelConfig::new(Variant::LcrRot, 4, 3), &mut rng).unwrap();
    let ex = random_example(&mut rng, 4, 2, 2, 2);
    let a = model.forward(&ex, Mode::Eval).unwrap();
    let mut drop_rng = rng::seeded(1);
    let b = model.forward(&ex, Mode::Train { dropout: 0.0, rng: &mut drop_rng }).unwrap();
    assert_eq!(a.probabilities(), b.probabilities());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn probabilities_form_a_distribution(seed in 0u64..10_000, l in 0usize..5, m in 1usize..4, r in 0usize..5, v in 0usize..5) {
        let mut rng = rng::seeded(seed);
        let mut model = Model::new(ModelConfig::new(Variant::ALL[v], 4, 3), &mut rng).unwrap();
        randomize(&mut model, 3.0, &mut rng);
        let ex = random_example(&mut rng, 4, l, m, r);
        let (p, rec) = model.predict_proba(&ex).unwrap();
        prop_assert!(p.iter().all(|&x| (0.0..=1.0).contains(&x)));
        prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        prop_assert_eq!(rec.representation.len(), model.config().representation_dim());
    }
}
