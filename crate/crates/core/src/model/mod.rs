//! The left-center-right separated network with rotatory attention, and its
//! four ablation variants.
//!
//! Each part of the sentence gets its own Bi-LSTM. For the full model, the
//! pooled target attends over each context (target2context), and each
//! attended context then attends back over the target (context2target). The
//! four resulting vectors are concatenated and classified with a softmax
//! layer.

mod attention;
mod lstm;
mod params;

use std::fmt;
use std::str::FromStr;

use rand::Rng;

pub use attention::{attend, pool, Attended};
pub use lstm::{encode_bilstm, lstm_step, run_lstm, LstmParams, LstmVars, LstmWeights};
pub use params::{BoundParams, ParamId, ParamKind, ParamStore, Parameter};

use crate::corpus::{Example, Sentiment};
use crate::embeddings::EmbeddingTable;
use crate::error::{Error, Result};
use crate::math::{Graph, Tensor, Var};
use crate::training::dropout_mask;

/// Number of sentiment classes.
pub const CLASSES: usize = 3;

/// Bound of the uniform weight initialization.
pub const INIT_BOUND: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Variant {
    /// Full model: target2context then context2target attention.
    LcrRot,
    /// No context2target step; the target is its pooled hidden state.
    NoTargetAttention,
    /// No center Bi-LSTM; the target is the mean of its raw embeddings.
    NoTargetLearned,
    /// No attention at all; every part is mean-pooled.
    NoAttention,
    /// context2target first (with pooled-context queries), then
    /// target2context.
    AttentionReverse,
}

impl Variant {
    pub const ALL: [Variant; 5] = [
        Variant::LcrRot,
        Variant::NoTargetAttention,
        Variant::NoTargetLearned,
        Variant::NoAttention,
        Variant::AttentionReverse,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Variant::LcrRot => "lcr-rot",
            Variant::NoTargetAttention => "no-target-attention",
            Variant::NoTargetLearned => "no-target-learned",
            Variant::NoAttention => "no-attention",
            Variant::AttentionReverse => "attention-reverse",
        }
    }

    fn has_center_lstm(self) -> bool {
        self != Variant::NoTargetLearned
    }

    fn has_context_attention(self) -> bool {
        self != Variant::NoAttention
    }

    fn has_target_attention(self) -> bool {
        matches!(self, Variant::LcrRot | Variant::AttentionReverse)
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Variant::ALL
            .into_iter()
            .find(|v| v.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown variant {s:?}")))
    }
}

/// Shape of a network.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ModelConfig {
    pub variant: Variant,
    /// Word embedding width `d`.
    pub embed_dim: usize,
    /// Hidden size `d_h` of each LSTM direction.
    pub hidden_dim: usize,
}

impl ModelConfig {
    pub fn new(variant: Variant, embed_dim: usize, hidden_dim: usize) -> Self {
        ModelConfig {
            variant,
            embed_dim,
            hidden_dim,
        }
    }

    /// Width `H` of a Bi-LSTM state.
    pub fn state_dim(&self) -> usize {
        2 * self.hidden_dim
    }

    /// Width of the sentence representation fed to the classifier.
    pub fn representation_dim(&self) -> usize {
        let h = self.state_dim();
        match self.variant {
            Variant::LcrRot | Variant::AttentionReverse => 4 * h,
            Variant::NoTargetAttention | Variant::NoAttention => 3 * h,
            Variant::NoTargetLearned => 2 * h + self.embed_dim,
        }
    }
}

/// Word vectors of one example. Rows are never trained.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddedExample {
    pub left: Vec<Tensor>,
    pub target: Vec<Tensor>,
    pub right: Vec<Tensor>,
    pub label: Sentiment,
}

impl EmbeddedExample {
    pub fn embed<R: Rng + ?Sized>(example: &Example, table: &mut EmbeddingTable, rng: &mut R) -> Self {
        let mut rows = |tokens: &[String]| -> Vec<Tensor> {
            tokens
                .iter()
                .map(|t| Tensor::vector(table.lookup(t, rng).to_vec()))
                .collect()
        };
        let left = rows(&example.left);
        let target = rows(&example.target);
        let right = rows(&example.right);
        EmbeddedExample {
            left,
            target,
            right,
            label: example.label,
        }
    }

    /// Embeds a corpus in order, materializing OOV rows as they appear.
    pub fn embed_all<R: Rng + ?Sized>(examples: &[Example], table: &mut EmbeddingTable, rng: &mut R) -> Vec<Self> {
        examples.iter().map(|e| Self::embed(e, table, rng)).collect()
    }
}

/// Attention weights and component vectors from one forward pass.
///
/// Weight vectors are `None` when the variant does not compute them and
/// empty when the corresponding context is empty.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct AttentionRecord {
    pub alpha_left: Option<Vec<f64>>,
    pub alpha_right: Option<Vec<f64>>,
    pub alpha_target_left: Option<Vec<f64>>,
    pub alpha_target_right: Option<Vec<f64>>,
    pub rep_left: Vec<f64>,
    pub rep_right: Vec<f64>,
    pub rep_target_left: Option<Vec<f64>>,
    pub rep_target_right: Option<Vec<f64>>,
    /// The single target vector used as a query or component: the pooled
    /// target states, or the mean raw embedding for `NoTargetLearned`.
    pub pooled_target: Option<Vec<f64>>,
    /// Sentence representation `v` before dropout.
    pub representation: Vec<f64>,
}

impl AttentionRecord {
    pub fn alphas(&self) -> [Option<&Vec<f64>>; 4] {
        [
            self.alpha_left.as_ref(),
            self.alpha_right.as_ref(),
            self.alpha_target_left.as_ref(),
            self.alpha_target_right.as_ref(),
        ]
    }
}

/// How a forward pass treats dropout.
pub enum Mode<'a> {
    Train { dropout: f64, rng: &'a mut crate::rng::Rng },
    Eval,
}

#[derive(Debug, Clone, Copy)]
struct Bilinear {
    weight: ParamId,
    bias: ParamId,
}

impl Bilinear {
    fn init<R: Rng + ?Sized>(store: &mut ParamStore, prefix: &str, rows: usize, cols: usize, rng: &mut R) -> Self {
        Bilinear {
            weight: store.add(
                format!("{prefix}.weight"),
                ParamKind::Weight,
                Tensor::uniform(&[rows, cols], INIT_BOUND, rng),
            ),
            bias: store.add(format!("{prefix}.bias"), ParamKind::Bias, Tensor::zeros(&[1])),
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct BiLstm {
    forward: LstmParams,
    backward: LstmParams,
}

impl BiLstm {
    fn init<R: Rng + ?Sized>(store: &mut ParamStore, prefix: &str, input: usize, hidden: usize, rng: &mut R) -> Self {
        BiLstm {
            forward: LstmParams::init(store, &format!("{prefix}.forward"), input, hidden, INIT_BOUND, rng),
            backward: LstmParams::init(store, &format!("{prefix}.backward"), input, hidden, INIT_BOUND, rng),
        }
    }

    fn encode(&self, graph: &mut Graph, bound: &BoundParams, inputs: &[Var]) -> Result<Vec<Var>> {
        let f = self.forward.vars(bound);
        let b = self.backward.vars(bound);
        encode_bilstm(graph, inputs, &f, &b)
    }
}

/// Which parameters a variant owns, by id.
#[derive(Debug, Clone, Copy)]
struct Layout {
    left: BiLstm,
    center: Option<BiLstm>,
    right: BiLstm,
    context_left: Option<Bilinear>,
    context_right: Option<Bilinear>,
    target_left: Option<Bilinear>,
    target_right: Option<Bilinear>,
    classifier_weight: ParamId,
    classifier_bias: ParamId,
}

impl Layout {
    fn build<R: Rng + ?Sized>(cfg: &ModelConfig, store: &mut ParamStore, rng: &mut R) -> Self {
        let (d, dh, h) = (cfg.embed_dim, cfg.hidden_dim, cfg.state_dim());
        let v = cfg.variant;
        let left = BiLstm::init(store, "left_lstm", d, dh, rng);
        let center = v.has_center_lstm().then(|| BiLstm::init(store, "center_lstm", d, dh, rng));
        let right = BiLstm::init(store, "right_lstm", d, dh, rng);
        let query_dim = if v.has_center_lstm() { h } else { d };
        let (context_left, context_right) = if v.has_context_attention() {
            (
                Some(Bilinear::init(store, "target2context.left", h, query_dim, rng)),
                Some(Bilinear::init(store, "target2context.right", h, query_dim, rng)),
            )
        } else {
            (None, None)
        };
        let (target_left, target_right) = if v.has_target_attention() {
            (
                Some(Bilinear::init(store, "context2target.left", h, h, rng)),
                Some(Bilinear::init(store, "context2target.right", h, h, rng)),
            )
        } else {
            (None, None)
        };
        let classifier_weight = store.add(
            "classifier.weight",
            ParamKind::Weight,
            Tensor::uniform(&[CLASSES, cfg.representation_dim()], INIT_BOUND, rng),
        );
        let classifier_bias = store.add("classifier.bias", ParamKind::Bias, Tensor::zeros(&[CLASSES]));
        Layout {
            left,
            center,
            right,
            context_left,
            context_right,
            target_left,
            target_right,
            classifier_weight,
            classifier_bias,
        }
    }
}

/// A network: configuration, parameters, and the parameter layout.
#[derive(Debug, Clone)]
pub struct Model {
    config: ModelConfig,
    params: ParamStore,
    layout: Layout,
}

impl PartialEq for Model {
    fn eq(&self, other: &Self) -> bool {
        self.config == other.config && self.params == other.params
    }
}

impl Model {
    /// Fresh parameters: weights from `U(-0.1, 0.1)`, biases zero.
    pub fn new<R: Rng + ?Sized>(config: ModelConfig, rng: &mut R) -> Result<Self> {
        if config.embed_dim == 0 || config.hidden_dim == 0 {
            return Err(Error::Config("embedding and hidden dimensions must be positive".into()));
        }
        let mut params = ParamStore::new();
        let layout = Layout::build(&config, &mut params, rng);
        Ok(Model { config, params, layout })
    }

    /// Rebuilds a model from stored parameters, checking every name and shape
    /// against the layout the configuration implies.
    pub fn from_params(config: ModelConfig, params: ParamStore) -> Result<Self> {
        let template = Model::new(config, &mut crate::rng::seeded(0))?;
        template.params.check_layout(&params)?;
        Ok(Model {
            config,
            params,
            layout: template.layout,
        })
    }

    pub fn config(&self) -> &ModelConfig {
        &self.config
    }

    pub fn variant(&self) -> Variant {
        self.config.variant
    }

    pub fn params(&self) -> &ParamStore {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut ParamStore {
        &mut self.params
    }

    fn check_example(&self, ex: &EmbeddedExample) -> Result<()> {
        if ex.target.is_empty() {
            return Err(Error::Domain("example has an empty target".into()));
        }
        let d = self.config.embed_dim;
        if let Some(bad) = ex.left.iter().chain(&ex.target).chain(&ex.right).find(|t| t.shape() != [d]) {
            return Err(Error::Config(format!(
                "embedding width {:?} does not match model dimension {d}",
                bad.shape()
            )));
        }
        Ok(())
    }

    /// Builds the computation for one example.
    pub fn forward(&self, ex: &EmbeddedExample, mode: Mode<'_>) -> Result<ForwardPass> {
        self.check_example(ex)?;
        let mut graph = Graph::new();
        let bound = self.params.bind(&mut graph);
        let layout = &self.layout;
        let h = self.config.state_dim();

        let mut consts = |rows: &[Tensor]| -> Vec<Var> { rows.iter().map(|t| graph.constant(t.clone())).collect() };
        let left_in = consts(&ex.left);
        let target_in = consts(&ex.target);
        let right_in = consts(&ex.right);

        let h_left = layout.left.encode(&mut graph, &bound, &left_in)?;
        let h_right = layout.right.encode(&mut graph, &bound, &right_in)?;
        let h_target = match &layout.center {
            Some(center) => Some(center.encode(&mut graph, &bound, &target_in)?),
            None => None,
        };

        let bilinear = |b: Option<Bilinear>| -> Result<(Var, Var)> {
            let b = b.ok_or_else(|| Error::Config("variant is missing an attention matrix".into()))?;
            Ok((bound.var(b.weight), bound.var(b.bias)))
        };
        let weights = |graph: &Graph, a: &Attended| -> Vec<f64> {
            a.weights.map(|w| graph.value(w).data().to_vec()).unwrap_or_default()
        };

        let mut record = AttentionRecord::default();
        let components: Vec<Var> = match self.config.variant {
            Variant::LcrRot => {
                let h_target = h_target.as_deref().expect("center lstm");
                let pooled = pool(&mut graph, h_target)?;
                let (wl, bl) = bilinear(layout.context_left)?;
                let (wr, br) = bilinear(layout.context_right)?;
                let left = attend(&mut graph, &h_left, pooled, wl, bl)?;
                let right = attend(&mut graph, &h_right, pooled, wr, br)?;
                let (wtl, btl) = bilinear(layout.target_left)?;
                let (wtr, btr) = bilinear(layout.target_right)?;
                let t_left = attend(&mut graph, h_target, left.representation, wtl, btl)?;
                let t_right = attend(&mut graph, h_target, right.representation, wtr, btr)?;
                record.alpha_left = Some(weights(&graph, &left));
                record.alpha_right = Some(weights(&graph, &right));
                record.alpha_target_left = Some(weights(&graph, &t_left));
                record.alpha_target_right = Some(weights(&graph, &t_right));
                record.rep_target_left = Some(graph.value(t_left.representation).data().to_vec());
                record.rep_target_right = Some(graph.value(t_right.representation).data().to_vec());
                record.pooled_target = Some(graph.value(pooled).data().to_vec());
                record.rep_left = graph.value(left.representation).data().to_vec();
                record.rep_right = graph.value(right.representation).data().to_vec();
                vec![
                    left.representation,
                    t_left.representation,
                    t_right.representation,
                    right.representation,
                ]
            }
            Variant::NoTargetAttention | Variant::NoTargetLearned => {
                let query = match &h_target {
                    Some(states) => pool(&mut graph, states)?,
                    None => pool(&mut graph, &target_in)?,
                };
                let (wl, bl) = bilinear(layout.context_left)?;
                let (wr, br) = bilinear(layout.context_right)?;
                let left = attend(&mut graph, &h_left, query, wl, bl)?;
                let right = attend(&mut graph, &h_right, query, wr, br)?;
                record.alpha_left = Some(weights(&graph, &left));
                record.alpha_right = Some(weights(&graph, &right));
                record.pooled_target = Some(graph.value(query).data().to_vec());
                record.rep_left = graph.value(left.representation).data().to_vec();
                record.rep_right = graph.value(right.representation).data().to_vec();
                vec![left.representation, query, right.representation]
            }
            Variant::NoAttention => {
                let h_target = h_target.as_deref().expect("center lstm");
                let left = attention::pool_or_zero(&mut graph, &h_left, h)?;
                let target = pool(&mut graph, h_target)?;
                let right = attention::pool_or_zero(&mut graph, &h_right, h)?;
                record.pooled_target = Some(graph.value(target).data().to_vec());
                record.rep_left = graph.value(left).data().to_vec();
                record.rep_right = graph.value(right).data().to_vec();
                vec![left, target, right]
            }
            Variant::AttentionReverse => {
                let h_target = h_target.as_deref().expect("center lstm");
                let q_left = attention::pool_or_zero(&mut graph, &h_left, h)?;
                let q_right = attention::pool_or_zero(&mut graph, &h_right, h)?;
                let (wtl, btl) = bilinear(layout.target_left)?;
                let (wtr, btr) = bilinear(layout.target_right)?;
                let t_left = attend(&mut graph, h_target, q_left, wtl, btl)?;
                let t_right = attend(&mut graph, h_target, q_right, wtr, btr)?;
                let (wl, bl) = bilinear(layout.context_left)?;
                let (wr, br) = bilinear(layout.context_right)?;
                let left = attend(&mut graph, &h_left, t_left.representation, wl, bl)?;
                let right = attend(&mut graph, &h_right, t_right.representation, wr, br)?;
                record.alpha_left = Some(weights(&graph, &left));
                record.alpha_right = Some(weights(&graph, &right));
                record.alpha_target_left = Some(weights(&graph, &t_left));
                record.alpha_target_right = Some(weights(&graph, &t_right));
                record.rep_target_left = Some(graph.value(t_left.representation).data().to_vec());
                record.rep_target_right = Some(graph.value(t_right.representation).data().to_vec());
                record.rep_left = graph.value(left.representation).data().to_vec();
                record.rep_right = graph.value(right.representation).data().to_vec();
                vec![
                    left.representation,
                    t_left.representation,
                    t_right.representation,
                    right.representation,
                ]
            }
        };

        let representation = graph.concat(&components)?;
        record.representation = graph.value(representation).data().to_vec();
        let classifier_input = match mode {
            Mode::Train { dropout, rng } if dropout > 0.0 => {
                let mask = graph.constant(dropout_mask(record.representation.len(), dropout, rng)?);
                graph.mul(representation, mask)?
            }
            _ => representation,
        };
        let logits = graph.matmul(bound.var(layout.classifier_weight), classifier_input)?;
        let logits = graph.add(logits, bound.var(layout.classifier_bias))?;
        let probs = graph.softmax(logits)?;

        Ok(ForwardPass {
            graph,
            bound,
            probs,
            representation,
            record,
            label: ex.label,
        })
    }

    /// Class probabilities and attention record in eval mode.
    pub fn predict_proba(&self, ex: &EmbeddedExample) -> Result<(Vec<f64>, AttentionRecord)> {
        let pass = self.forward(ex, Mode::Eval)?;
        Ok((pass.probabilities().to_vec(), pass.record))
    }
}

/// A recorded forward computation.
#[derive(Debug, Clone)]
pub struct ForwardPass {
    pub graph: Graph,
    pub bound: BoundParams,
    pub probs: Var,
    pub representation: Var,
    pub record: AttentionRecord,
    pub label: Sentiment,
}

impl ForwardPass {
    pub fn probabilities(&self) -> &[f64] {
        self.graph.value(self.probs).data()
    }
}
