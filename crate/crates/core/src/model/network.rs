//! The twin-stream network: time-series LSTM, event LSTM, fusion embedding,
//! main-type head, subtype head and gap head.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::config::{HeadMode, ModelConfig, Sample};
use super::loss::{time_penalty, ClassWeights, LossTerms};
use super::lstm::{step_backward, step_cached, LstmLayout, StepCache};
use crate::error::{invalid, Error, Result};
use crate::numcore::{
    argmax, log_softmax_in_place, softmax_in_place, Grads, Matrix, ParamId, ParamStore, Real,
    Vector,
};

pub const INIT_SCALE: f64 = 0.08;

#[derive(Debug, Clone, PartialEq)]
struct Layout {
    ts: Option<LstmLayout>,
    event: Option<LstmLayout>,
    proj: Option<ParamId>,
    fuse_w: ParamId,
    fuse_b: ParamId,
    main_w: ParamId,
    main_b: ParamId,
    sub_w: ParamId,
    sub_b: ParamId,
    time_w: ParamId,
    time_b: ParamId,
}

/// All learnable tensors of the network together with its configuration.
#[derive(Debug, Clone)]
pub struct TwinRnn<T: Real = f64> {
    config: ModelConfig,
    params: ParamStore<T>,
    layout: Layout,
}

/// Intermediate activations of one forward pass.
#[derive(Debug, Clone)]
pub struct Trace<T> {
    ts_steps: Vec<StepCache<T>>,
    event_raw: Vec<Vec<T>>,
    event_steps: Vec<StepCache<T>>,
    fused_in: Vec<T>,
    embed: Vec<T>,
    main_logits: Vec<T>,
    sub_in: Vec<T>,
    sub_logits: Vec<T>,
}

impl<T: Real> Trace<T> {
    pub fn embedding(&self) -> &[T] {
        &self.embed
    }

    pub fn final_hidden(&self) -> &[T] {
        &self.fused_in
    }
}

#[derive(Debug, Clone)]
pub struct Output<T: Real = f64> {
    pub main_probs: Vector<T>,
    pub sub_probs: Vector<T>,
    /// Predicted days to the next event (raw, may be negative).
    pub gap: T,
    pub trace: Trace<T>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PredictedEvent {
    pub main_type: usize,
    pub sub_type: usize,
    pub gap_days: f64,
}

/// Encodes an event step as one-hot subtype (null slot last) plus `ln(1 + dt)`.
pub(crate) fn encode_event<T: Real>(k_sub: usize, sub: Option<usize>, dt: f64) -> Vec<T> {
    let mut raw = vec![T::zero(); k_sub + 2];
    raw[sub.unwrap_or(k_sub)] = T::one();
    raw[k_sub + 1] = T::of(dt.ln_1p());
    raw
}

impl<T: Real> TwinRnn<T> {
    /// Zero-valued network (every parameter exactly 0).
    pub fn zeros(config: ModelConfig) -> Result<Self> {
        config.validate()?;
        let mut params = ParamStore::new();
        let c = &config;
        let ts = if c.streams.uses_time_series() {
            Some(LstmLayout::register(
                &mut params,
                "ts",
                c.ts_feature_dim,
                c.hidden_dim,
                c.peephole,
            )?)
        } else {
            None
        };
        let (event, proj) = if c.streams.uses_events() {
            let proj = if c.uses_projection() {
                Some(params.add(
                    "event.proj",
                    Matrix::zeros(c.event_input_dim(), c.raw_event_dim()),
                )?)
            } else {
                None
            };
            let l = LstmLayout::register(
                &mut params,
                "event",
                c.event_input_dim(),
                c.hidden_dim,
                c.peephole,
            )?;
            (Some(l), proj)
        } else {
            (None, None)
        };
        let layout = Layout {
            ts,
            event,
            proj,
            fuse_w: params.add("fuse.W", Matrix::zeros(c.embed_dim, c.fused_dim()))?,
            fuse_b: params.add("fuse.b", Matrix::zeros(c.embed_dim, 1))?,
            main_w: params.add("head.W_U", Matrix::zeros(c.k_main, c.embed_dim))?,
            main_b: params.add("head.b_U", Matrix::zeros(c.k_main, 1))?,
            sub_w: params.add("head.W_u", Matrix::zeros(c.k_sub, c.sub_head_input_dim()))?,
            sub_b: params.add("head.b_u", Matrix::zeros(c.k_sub, 1))?,
            time_w: params.add("head.W_s", Matrix::zeros(1, c.embed_dim))?,
            time_b: params.add("head.b_s", Matrix::zeros(1, 1))?,
        };
        Ok(Self {
            config,
            params,
            layout,
        })
    }

    /// Uniform `[-0.08, 0.08]` initialisation with forget-gate biases at 1.
    pub fn new(config: ModelConfig, seed: u64) -> Result<Self> {
        let mut net = Self::zeros(config)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for id in net.params.ids().collect::<Vec<_>>() {
            for x in net.params.value_mut(id).as_mut_slice() {
                *x = T::of(rng.gen_range(-INIT_SCALE..INIT_SCALE));
            }
        }
        for prefix in ["ts", "event"] {
            if let Ok(b_f) = net.params.id(&format!("{prefix}.b_f")) {
                net.params.value_mut(b_f).fill(T::one());
            }
        }
        Ok(net)
    }

    /// Rebuilds a network around a loaded parameter store, checking that
    /// it holds exactly the tensors the configuration calls for.
    pub fn from_params(config: ModelConfig, params: ParamStore<T>) -> Result<Self> {
        let template = Self::zeros(config.clone())?;
        if template.params.len() != params.len() {
            return Err(invalid(format!(
                "parameter count {} does not match configuration ({})",
                params.len(),
                template.params.len()
            )));
        }
        let mut remap = |id: ParamId| -> Result<ParamId> {
            let name = template.params.name(id);
            let got = params.id(name)?;
            if params.value(got).shape() != template.params.value(id).shape() {
                return Err(Error::Shape {
                    op: "TwinRnn::from_params",
                    expected: format!("{name}: {:?}", template.params.value(id).shape()),
                    got: format!("{:?}", params.value(got).shape()),
                });
            }
            Ok(got)
        };
        let c = &config;
        let t = &template.layout;
        let layout = Layout {
            ts: match t.ts {
                Some(_) => Some(LstmLayout::attach(
                    &params,
                    "ts",
                    c.ts_feature_dim,
                    c.hidden_dim,
                    c.peephole,
                )?),
                None => None,
            },
            event: match t.event {
                Some(_) => Some(LstmLayout::attach(
                    &params,
                    "event",
                    c.event_input_dim(),
                    c.hidden_dim,
                    c.peephole,
                )?),
                None => None,
            },
            proj: t.proj.map(&mut remap).transpose()?,
            fuse_w: remap(t.fuse_w)?,
            fuse_b: remap(t.fuse_b)?,
            main_w: remap(t.main_w)?,
            main_b: remap(t.main_b)?,
            sub_w: remap(t.sub_w)?,
            sub_b: remap(t.sub_b)?,
            time_w: remap(t.time_w)?,
            time_b: remap(t.time_b)?,
        };
        Ok(Self {
            config,
            params,
            layout,
        })
    }

    pub fn config(&self) -> &ModelConfig {
        &self.config
    }

    pub fn params(&self) -> &ParamStore<T> {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut ParamStore<T> {
        &mut self.params
    }

    pub fn into_params(self) -> ParamStore<T> {
        self.params
    }

    fn check_inputs(&self, s: &Sample) -> Result<()> {
        let c = &self.config;
        if c.streams.uses_time_series() {
            if s.ts_window.is_empty() {
                return Err(Error::Empty("time-series window"));
            }
            for v in &s.ts_window {
                if v.len() != c.ts_feature_dim {
                    return Err(Error::Shape {
                        op: "forward ts_window",
                        expected: c.ts_feature_dim.to_string(),
                        got: v.len().to_string(),
                    });
                }
                if v.iter().any(|x| !x.is_finite()) {
                    return Err(Error::NonFinite("time-series features"));
                }
            }
        }
        if c.streams.uses_events() {
            if s.event_window.is_empty() {
                return Err(Error::Empty("event window"));
            }
            for e in &s.event_window {
                if let Some(k) = e.sub_type {
                    if k >= c.k_sub {
                        return Err(Error::UnknownType(format!("subtype id {k}")));
                    }
                }
                if !(e.dt.is_finite() && e.dt >= 0.0) {
                    return Err(invalid(format!(
                        "event gap must be finite and >= 0, got {}",
                        e.dt
                    )));
                }
            }
        }
        Ok(())
    }

    fn check_targets(&self, s: &Sample) -> Result<()> {
        if s.target_main >= self.config.k_main {
            return Err(Error::UnknownType(format!(
                "main type id {}",
                s.target_main
            )));
        }
        if s.target_sub >= self.config.k_sub {
            return Err(Error::UnknownType(format!("subtype id {}", s.target_sub)));
        }
        if !(s.target_gap.is_finite() && s.target_gap > 0.0) {
            return Err(invalid(format!(
                "target gap must be positive, got {}",
                s.target_gap
            )));
        }
        Ok(())
    }

    fn run_lstm(&self, l: &LstmLayout, inputs: impl Iterator<Item = Vec<T>>) -> Vec<StepCache<T>> {
        let n = l.hidden_dim;
        let mut h = vec![T::zero(); n];
        let mut c = vec![T::zero(); n];
        let mut steps = Vec::new();
        for x in inputs {
            let cache = step_cached(&self.params, l, &x, &h, &c);
            h.clone_from(&cache.h);
            c.clone_from(&cache.c);
            steps.push(cache);
        }
        steps
    }

    pub fn forward(&self, s: &Sample) -> Result<Output<T>> {
        self.check_inputs(s)?;
        let c = &self.config;
        let p = &self.params;
        let l = &self.layout;
        let mut fused_in = Vec::with_capacity(c.fused_dim());

        let ts_steps = match &l.ts {
            Some(ts) => {
                let steps = self.run_lstm(
                    ts,
                    s.ts_window
                        .iter()
                        .map(|v| v.iter().map(|&x| T::of(x)).collect()),
                );
                fused_in.extend_from_slice(&steps.last().expect("non-empty window").h);
                steps
            }
            None => Vec::new(),
        };
        let (event_raw, event_steps) = match &l.event {
            Some(ev) => {
                let raw: Vec<Vec<T>> = s
                    .event_window
                    .iter()
                    .map(|e| encode_event(c.k_sub, e.sub_type, e.dt))
                    .collect();
                let inputs = raw.iter().map(|r| match l.proj {
                    Some(pid) => {
                        let mut x = vec![T::zero(); c.event_input_dim()];
                        p.value(pid).matvec_acc(r, &mut x);
                        x
                    }
                    None => r.clone(),
                });
                let steps = self.run_lstm(ev, inputs);
                fused_in.extend_from_slice(&steps.last().expect("non-empty window").h);
                (raw, steps)
            }
            None => (Vec::new(), Vec::new()),
        };

        let mut embed = p.value(l.fuse_b).as_slice().to_vec();
        p.value(l.fuse_w).matvec_acc(&fused_in, &mut embed);
        embed.iter_mut().for_each(|x| *x = x.tanh());

        let mut main_logits = p.value(l.main_b).as_slice().to_vec();
        p.value(l.main_w).matvec_acc(&embed, &mut main_logits);
        let mut main_probs = main_logits.clone();
        softmax_in_place(&mut main_probs);

        let mut sub_in = embed.clone();
        if c.head_mode == HeadMode::Hierarchical {
            sub_in.extend_from_slice(&main_probs);
        }
        let mut sub_logits = p.value(l.sub_b).as_slice().to_vec();
        p.value(l.sub_w).matvec_acc(&sub_in, &mut sub_logits);
        let mut sub_probs = sub_logits.clone();
        softmax_in_place(&mut sub_probs);

        let mut gap = [p.value(l.time_b).as_slice()[0]];
        p.value(l.time_w).matvec_acc(&embed, &mut gap);

        let outputs_finite = main_probs
            .iter()
            .chain(&sub_probs)
            .chain(&gap)
            .all(|x| x.is_finite());
        if !outputs_finite {
            return Err(Error::NonFinite("forward outputs"));
        }
        Ok(Output {
            main_probs: Vector::from_vec_unchecked(main_probs),
            sub_probs: Vector::from_vec_unchecked(sub_probs),
            gap: gap[0],
            trace: Trace {
                ts_steps,
                event_raw,
                event_steps,
                fused_in,
                embed,
                main_logits,
                sub_in,
                sub_logits,
            },
        })
    }

    /// Per-term objective for one forward output. Log-probabilities come from
    /// the logits, never from the rounded probabilities.
    pub fn loss_terms(&self, out: &Output<T>, s: &Sample, w: &ClassWeights) -> Result<LossTerms> {
        self.check_targets(s)?;
        w.check(self.config.k_main, self.config.k_sub)?;
        let mut lm = out.trace.main_logits.clone();
        log_softmax_in_place(&mut lm);
        let mut ls = out.trace.sub_logits.clone();
        log_softmax_in_place(&mut ls);
        let wm = w.main[s.target_main];
        let ws = w.sub[s.target_sub];
        // 0·log p is taken as 0 so disabled terms never contribute
        let main = if wm == 0.0 {
            0.0
        } else {
            -wm * lm[s.target_main].as_f64()
        };
        let sub = if ws == 0.0 {
            0.0
        } else {
            -ws * ls[s.target_sub].as_f64()
        };
        Ok(LossTerms {
            main,
            sub,
            time: time_penalty(s.target_gap, out.gap.as_f64(), self.config.sigma2)?,
        })
    }

    pub fn loss(&self, out: &Output<T>, s: &Sample, w: &ClassWeights) -> Result<f64> {
        Ok(self.loss_terms(out, s, w)?.total())
    }

    /// Forward plus loss in one call.
    pub fn sample_loss(&self, s: &Sample, w: &ClassWeights) -> Result<f64> {
        let out = self.forward(s)?;
        self.loss(&out, s, w)
    }

    /// Backpropagation through both recurrent streams. Adds the gradient of
    /// the sample's loss into `grads` and returns the loss terms.
    pub fn backward(
        &self,
        s: &Sample,
        w: &ClassWeights,
        grads: &mut Grads<T>,
    ) -> Result<LossTerms> {
        let out = self.forward(s)?;
        let terms = self.loss_terms(&out, s, w)?;
        let c = &self.config;
        let p = &self.params;
        let l = &self.layout;
        let tr = &out.trace;
        let one = T::one();

        // subtype head
        let ws = T::of(w.sub[s.target_sub]);
        let mut dz_sub: Vec<T> = out.sub_probs.as_slice().iter().map(|&u| u * ws).collect();
        dz_sub[s.target_sub] -= ws;
        grads.get_mut(l.sub_w).outer_acc(&dz_sub, &tr.sub_in);
        add_into(grads.get_mut(l.sub_b).as_mut_slice(), &dz_sub);
        let mut d_sub_in = vec![T::zero(); tr.sub_in.len()];
        p.value(l.sub_w).t_matvec_acc(&dz_sub, &mut d_sub_in);
        let mut d_embed = d_sub_in[..c.embed_dim].to_vec();

        // main head, including the path through the subtype head's input
        let wm = T::of(w.main[s.target_main]);
        let probs = out.main_probs.as_slice();
        let mut dz_main: Vec<T> = probs.iter().map(|&u| u * wm).collect();
        dz_main[s.target_main] -= wm;
        if c.head_mode == HeadMode::Hierarchical {
            let d_probs = &d_sub_in[c.embed_dim..];
            let inner: T = probs.iter().zip(d_probs).map(|(&u, &d)| u * d).sum();
            for k in 0..probs.len() {
                dz_main[k] += probs[k] * (d_probs[k] - inner);
            }
        }
        grads.get_mut(l.main_w).outer_acc(&dz_main, &tr.embed);
        add_into(grads.get_mut(l.main_b).as_mut_slice(), &dz_main);
        p.value(l.main_w).t_matvec_acc(&dz_main, &mut d_embed);

        // gap head
        let d_gap = (out.gap - T::of(s.target_gap)) / T::of(c.sigma2);
        grads.get_mut(l.time_w).outer_acc(&[d_gap], &tr.embed);
        grads.get_mut(l.time_b).as_mut_slice()[0] += d_gap;
        p.value(l.time_w).t_matvec_acc(&[d_gap], &mut d_embed);

        // fusion
        let d_pre: Vec<T> = d_embed
            .iter()
            .zip(&tr.embed)
            .map(|(&d, &e)| d * (one - e * e))
            .collect();
        grads.get_mut(l.fuse_w).outer_acc(&d_pre, &tr.fused_in);
        add_into(grads.get_mut(l.fuse_b).as_mut_slice(), &d_pre);
        let mut d_fused = vec![T::zero(); tr.fused_in.len()];
        p.value(l.fuse_w).t_matvec_acc(&d_pre, &mut d_fused);

        let mut offset = 0;
        if let Some(ts) = &l.ts {
            let dh = d_fused[offset..offset + c.hidden_dim].to_vec();
            offset += c.hidden_dim;
            bptt(
                p,
                ts,
                &tr.ts_steps,
                dh,
                grads,
                None::<fn(&mut Grads<T>, usize, &[T])>,
            );
        }
        if let Some(ev) = &l.event {
            let dh = d_fused[offset..offset + c.hidden_dim].to_vec();
            match l.proj {
                Some(pid) => {
                    let to_proj = |g: &mut Grads<T>, t: usize, dx: &[T]| {
                        g.get_mut(pid).outer_acc(dx, &tr.event_raw[t])
                    };
                    bptt(p, ev, &tr.event_steps, dh, grads, Some(to_proj))
                }
                None => bptt(
                    p,
                    ev,
                    &tr.event_steps,
                    dh,
                    grads,
                    None::<fn(&mut Grads<T>, usize, &[T])>,
                ),
            }
        }
        Ok(terms)
    }

    /// Runs [`backward`](Self::backward) and adds the result to the store's
    /// own gradient accumulators.
    pub fn accumulate_gradients(&mut self, s: &Sample, w: &ClassWeights) -> Result<LossTerms> {
        let mut g = self.params.zeros_like();
        let terms = self.backward(s, w, &mut g)?;
        self.params.accumulate(&g, T::one())?;
        Ok(terms)
    }

    /// Most likely main type and subtype (ties to the lowest id) and the
    /// predicted gap clamped at zero.
    pub fn predict_next(&self, s: &Sample) -> Result<PredictedEvent> {
        let out = self.forward(s)?;
        Ok(PredictedEvent {
            main_type: argmax(out.main_probs.as_slice()).expect("k_main >= 2"),
            sub_type: argmax(out.sub_probs.as_slice()).expect("k_sub >= 2"),
            gap_days: out.gap.as_f64().max(0.0),
        })
    }
}

fn add_into<T: Real>(dst: &mut [T], src: &[T]) {
    for (d, &s) in dst.iter_mut().zip(src) {
        *d += s;
    }
}

/// Reverse pass over an unrolled LSTM, starting from the gradient on its
/// final hidden state. `on_input`, when given, receives each step's input
/// gradient.
fn bptt<T: Real, F: FnMut(&mut Grads<T>, usize, &[T])>(
    p: &ParamStore<T>,
    l: &LstmLayout,
    steps: &[StepCache<T>],
    dh_last: Vec<T>,
    grads: &mut Grads<T>,
    mut on_input: Option<F>,
) {
    let mut dh = dh_last;
    let mut dc = vec![T::zero(); l.hidden_dim];
    let mut dx = vec![T::zero(); l.input_dim];
    for (t, cache) in steps.iter().enumerate().rev() {
        let (dh_prev, dc_prev) = match on_input.as_mut() {
            Some(f) => {
                dx.iter_mut().for_each(|x| *x = T::zero());
                let r = step_backward(p, l, cache, &dh, &dc, grads, Some(&mut dx));
                f(grads, t, &dx);
                r
            }
            None => step_backward(p, l, cache, &dh, &dc, grads, None),
        };
        dh = dh_prev;
        dc = dc_prev;
    }
}
