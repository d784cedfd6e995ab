//! Every runnable example, executed as a test.

macro_rules! example {
    ($name:ident) => {
        #[allow(dead_code)]
        mod $name {
            include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/", stringify!($name), ".rs"));
        }

        #[test]
        fn $name() {
            $name::run().expect(stringify!($name));
        }
    };
}

example!(segmentation);
example!(corpus_stats);
example!(embeddings);
example!(autodiff);
example!(gradcheck);
example!(significance);
example!(train_synthetic);
example!(attention_viz);
example!(ablation);
