//! Single-layer LSTM with a linear readout over the final hidden state.
//!
//! Parameters live in one flat vector so the optimizer and the gradient
//! buffers share a layout. Block order: `W_i W_f W_o W_g` (H x I each),
//! `U_i U_f U_o U_g` (H x H), `b_i b_f b_o b_g` (H), `R` (C x H), `r` (C).
//! All matrices are row-major.

use std::io::{Read, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::ser::SerializeMap;
use serde::{Serialize, Serializer};

use super::features::{FeatureSeq, FEATURE_DIM};
use super::GestureError;

pub const NUM_CLASSES: usize = 6;
/// Gate order used throughout: input, forget, output, candidate.
pub const GATE_NAMES: [&str; 4] = ["i", "f", "o", "g"];

const I: usize = 0;
const F: usize = 1;
const O: usize = 2;
const G: usize = 3;

#[derive(Debug, Clone, PartialEq)]
pub struct LstmModel {
    input_dim: usize,
    hidden: usize,
    params: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LstmState {
    pub h: Vec<f64>,
    pub c: Vec<f64>,
}

impl LstmState {
    pub fn zeros(hidden: usize) -> Self {
        Self { h: vec![0.0; hidden], c: vec![0.0; hidden] }
    }
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

impl LstmModel {
    pub fn zeros(input_dim: usize, hidden: usize) -> Self {
        let n = Self::param_count(input_dim, hidden);
        Self { input_dim, hidden, params: vec![0.0; n] }
    }

    /// Uniform(-1/sqrt(H), 1/sqrt(H)) weights, forget-gate bias 1.
    pub fn init(input_dim: usize, hidden: usize, seed: u64) -> Self {
        let mut m = Self::zeros(input_dim, hidden);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let bound = 1.0 / (hidden as f64).sqrt();
        let bias_start = m.bias_offset(0);
        let bias_end = m.bias_offset(4);
        for (k, p) in m.params.iter_mut().enumerate() {
            if !(bias_start..bias_end).contains(&k) {
                *p = rng.random_range(-bound..bound);
            }
        }
        for b in m.bias_mut(F) {
            *b = 1.0;
        }
        m
    }

    /// Random weights of the given scale everywhere, biases included.
    pub fn random(input_dim: usize, hidden: usize, scale: f64, seed: u64) -> Self {
        let mut m = Self::zeros(input_dim, hidden);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for p in m.params.iter_mut() {
            *p = rng.random_range(-scale..scale);
        }
        m
    }

    pub fn param_count(input_dim: usize, hidden: usize) -> usize {
        4 * hidden * input_dim + 4 * hidden * hidden + 4 * hidden + NUM_CLASSES * hidden + NUM_CLASSES
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn hidden(&self) -> usize {
        self.hidden
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    fn w_offset(&self, gate: usize) -> usize {
        gate * self.hidden * self.input_dim
    }

    fn u_offset(&self, gate: usize) -> usize {
        4 * self.hidden * self.input_dim + gate * self.hidden * self.hidden
    }

    fn bias_offset(&self, gate: usize) -> usize {
        4 * self.hidden * (self.input_dim + self.hidden) + gate * self.hidden
    }

    fn readout_offset(&self) -> usize {
        self.bias_offset(4)
    }

    fn readout_bias_offset(&self) -> usize {
        self.readout_offset() + NUM_CLASSES * self.hidden
    }

    pub fn w(&self, gate: usize) -> &[f64] {
        let o = self.w_offset(gate);
        &self.params[o..o + self.hidden * self.input_dim]
    }

    pub fn u(&self, gate: usize) -> &[f64] {
        let o = self.u_offset(gate);
        &self.params[o..o + self.hidden * self.hidden]
    }

    pub fn bias(&self, gate: usize) -> &[f64] {
        let o = self.bias_offset(gate);
        &self.params[o..o + self.hidden]
    }

    pub fn bias_mut(&mut self, gate: usize) -> &mut [f64] {
        let o = self.bias_offset(gate);
        let h = self.hidden;
        &mut self.params[o..o + h]
    }

    pub fn readout(&self) -> &[f64] {
        let o = self.readout_offset();
        &self.params[o..o + NUM_CLASSES * self.hidden]
    }

    pub fn readout_bias(&self) -> &[f64] {
        let o = self.readout_bias_offset();
        &self.params[o..o + NUM_CLASSES]
    }

    /// Named parameter blocks in file order.
    pub fn blocks(&self) -> Vec<(String, &[f64])> {
        let mut out = Vec::with_capacity(14);
        for (g, name) in GATE_NAMES.iter().enumerate() {
            out.push((format!("W_{name}"), self.w(g)));
        }
        for (g, name) in GATE_NAMES.iter().enumerate() {
            out.push((format!("U_{name}"), self.u(g)));
        }
        for (g, name) in GATE_NAMES.iter().enumerate() {
            out.push((format!("b_{name}"), self.bias(g)));
        }
        out.push(("R".to_string(), self.readout()));
        out.push(("r".to_string(), self.readout_bias()));
        out
    }

    /// One recurrent step.
    pub fn step(&self, state: &LstmState, x: &[f64]) -> Result<LstmState, GestureError> {
        if x.len() != self.input_dim || state.h.len() != self.hidden || state.c.len() != self.hidden {
            return Err(GestureError::Shape(format!(
                "model expects x[{}], h[{}], c[{}]; got x[{}], h[{}], c[{}]",
                self.input_dim,
                self.hidden,
                self.hidden,
                x.len(),
                state.h.len(),
                state.c.len()
            )));
        }
        let gates = self.gates(&state.h, x);
        Ok(self.finish_step(&state.c, &gates).0)
    }

    // Activated gate values [i, f, o, g], each of length H.
    fn gates(&self, h: &[f64], x: &[f64]) -> [Vec<f64>; 4] {
        let hd = self.hidden;
        let id = self.input_dim;
        std::array::from_fn(|gate| {
            let w = self.w(gate);
            let u = self.u(gate);
            let b = self.bias(gate);
            (0..hd)
                .map(|r| {
                    let mut a = b[r];
                    let wr = &w[r * id..(r + 1) * id];
                    for k in 0..id {
                        a += wr[k] * x[k];
                    }
                    let ur = &u[r * hd..(r + 1) * hd];
                    for k in 0..hd {
                        a += ur[k] * h[k];
                    }
                    if gate == G {
                        a.tanh()
                    } else {
                        sigmoid(a)
                    }
                })
                .collect()
        })
    }

    fn finish_step(&self, c_prev: &[f64], gates: &[Vec<f64>; 4]) -> (LstmState, Vec<f64>) {
        let hd = self.hidden;
        let mut c = vec![0.0; hd];
        let mut h = vec![0.0; hd];
        let mut tanh_c = vec![0.0; hd];
        for k in 0..hd {
            c[k] = gates[F][k] * c_prev[k] + gates[I][k] * gates[G][k];
            tanh_c[k] = c[k].tanh();
            h[k] = gates[O][k] * tanh_c[k];
        }
        (LstmState { h, c }, tanh_c)
    }

    pub fn logits(&self, h: &[f64]) -> Vec<f64> {
        let r = self.readout();
        let rb = self.readout_bias();
        (0..NUM_CLASSES)
            .map(|j| rb[j] + (0..self.hidden).map(|k| r[j * self.hidden + k] * h[k]).sum::<f64>())
            .collect()
    }

    fn check_sequence(&self, seq: &FeatureSeq) -> Result<(), GestureError> {
        if seq.is_empty() {
            return Err(GestureError::EmptySequence);
        }
        if self.input_dim != FEATURE_DIM {
            return Err(GestureError::Shape(format!(
                "model input dim {} does not match feature dim {FEATURE_DIM}",
                self.input_dim
            )));
        }
        Ok(())
    }

    /// Runs the sequence and keeps every intermediate needed for BPTT.
    pub fn trace(&self, seq: &FeatureSeq) -> Result<Trace, GestureError> {
        self.check_sequence(seq)?;
        let mut state = LstmState::zeros(self.hidden);
        let mut steps = Vec::with_capacity(seq.len());
        for x in seq.rows() {
            let gates = self.gates(&state.h, x);
            let (next, tanh_c) = self.finish_step(&state.c, &gates);
            steps.push(StepCache { x: x.to_vec(), h_prev: state.h, c_prev: state.c, gates, tanh_c });
            state = next;
        }
        let logits = self.logits(&state.h);
        Ok(Trace { steps, last: state, logits })
    }

    /// Full backpropagation-through-time gradient for one sample, accumulated
    /// into `grads`. Returns the loss and the predicted class index.
    pub fn gradient(
        &self,
        seq: &FeatureSeq,
        label: usize,
        grads: &mut Gradients,
    ) -> Result<(f64, usize), GestureError> {
        if label >= NUM_CLASSES {
            return Err(GestureError::Shape(format!("label {label} out of range")));
        }
        let trace = self.trace(seq)?;
        let predicted = argmax(&trace.logits);
        let probs = softmax(&trace.logits);
        let loss = -probs[label].max(f64::MIN_POSITIVE).ln();
        let hd = self.hidden;
        let id = self.input_dim;
        let g = &mut grads.values;

        let mut dlogits = probs;
        dlogits[label] -= 1.0;
        let ro = self.readout_offset();
        let rbo = self.readout_bias_offset();
        let mut dh = vec![0.0; hd];
        let r = self.readout();
        for j in 0..NUM_CLASSES {
            g[rbo + j] += dlogits[j];
            for k in 0..hd {
                g[ro + j * hd + k] += dlogits[j] * trace.last.h[k];
                dh[k] += r[j * hd + k] * dlogits[j];
            }
        }

        let mut dc = vec![0.0; hd];
        let mut da: [Vec<f64>; 4] = std::array::from_fn(|_| vec![0.0; hd]);
        for step in trace.steps.iter().rev() {
            let gi = &step.gates[I];
            let gf = &step.gates[F];
            let go = &step.gates[O];
            let gg = &step.gates[G];
            for k in 0..hd {
                let d_o = dh[k] * step.tanh_c[k];
                dc[k] += dh[k] * go[k] * (1.0 - step.tanh_c[k] * step.tanh_c[k]);
                let d_i = dc[k] * gg[k];
                let d_g = dc[k] * gi[k];
                let d_f = dc[k] * step.c_prev[k];
                da[I][k] = d_i * gi[k] * (1.0 - gi[k]);
                da[F][k] = d_f * gf[k] * (1.0 - gf[k]);
                da[O][k] = d_o * go[k] * (1.0 - go[k]);
                da[G][k] = d_g * (1.0 - gg[k] * gg[k]);
                dc[k] *= gf[k];
            }
            let mut dh_prev = vec![0.0; hd];
            for (gate, dag) in da.iter().enumerate() {
                let wo = self.w_offset(gate);
                let uo = self.u_offset(gate);
                let bo = self.bias_offset(gate);
                let u = self.u(gate);
                for r in 0..hd {
                    let a = dag[r];
                    g[bo + r] += a;
                    for k in 0..id {
                        g[wo + r * id + k] += a * step.x[k];
                    }
                    for k in 0..hd {
                        g[uo + r * hd + k] += a * step.h_prev[k];
                        dh_prev[k] += u[r * hd + k] * a;
                    }
                }
            }
            dh = dh_prev;
        }
        Ok((loss, predicted))
    }

    pub fn write_json<W: Write>(&self, out: W) -> Result<(), GestureError> {
        serde_json::to_writer(out, &ModelFile::from(self)).map_err(|e| GestureError::ModelFile(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&ModelFile::from(self)).expect("model serializes")
    }

    pub fn read_json<R: Read>(input: R) -> Result<Self, GestureError> {
        let v: serde_json::Value =
            serde_json::from_reader(input).map_err(|e| GestureError::ModelFile(e.to_string()))?;
        Self::from_value(&v)
    }

    pub fn from_json(text: &str) -> Result<Self, GestureError> {
        Self::read_json(text.as_bytes())
    }

    fn from_value(v: &serde_json::Value) -> Result<Self, GestureError> {
        let bad = |m: &str| GestureError::ModelFile(m.to_string());
        if v.get("version").and_then(|x| x.as_u64()) != Some(1) {
            return Err(bad("unsupported or missing version"));
        }
        let input_dim = v.get("input_dim").and_then(|x| x.as_u64()).ok_or_else(|| bad("missing input_dim"))? as usize;
        let hidden = v.get("hidden").and_then(|x| x.as_u64()).ok_or_else(|| bad("missing hidden"))? as usize;
        let weights = v.get("weights").and_then(|x| x.as_object()).ok_or_else(|| bad("missing weights"))?;
        let mut model = Self::zeros(input_dim, hidden);
        let layout: Vec<(String, usize)> = model.blocks().into_iter().map(|(n, b)| (n, b.len())).collect();
        let mut flat = Vec::with_capacity(model.params.len());
        for (name, len) in &layout {
            let arr = weights
                .get(name)
                .and_then(|x| x.as_array())
                .ok_or_else(|| GestureError::ModelFile(format!("missing weight block {name}")))?;
            if arr.len() != *len {
                return Err(GestureError::ModelFile(format!("block {name} has {} entries, expected {len}", arr.len())));
            }
            for x in arr {
                let f = x.as_f64().ok_or_else(|| GestureError::ModelFile(format!("non-numeric entry in {name}")))?;
                if !f.is_finite() {
                    return Err(GestureError::ModelFile(format!("non-finite entry in {name}")));
                }
                flat.push(f);
            }
        }
        if flat.len() != model.params.len() {
            return Err(GestureError::ModelFile(format!(
                "expected {} parameters, found {}",
                model.params.len(),
                flat.len()
            )));
        }
        model.params = flat;
        Ok(model)
    }
}

/// Serialized form: `{"version":1,"input_dim":11,"hidden":H,"weights":{name: [...], ...}}`.
pub struct ModelFile<'a> {
    model: &'a LstmModel,
}

impl<'a> From<&'a LstmModel> for ModelFile<'a> {
    fn from(model: &'a LstmModel) -> Self {
        Self { model }
    }
}

struct Blocks<'a>(&'a LstmModel);

impl Serialize for Blocks<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let blocks = self.0.blocks();
        let mut map = s.serialize_map(Some(blocks.len()))?;
        for (name, values) in blocks {
            map.serialize_entry(&name, values)?;
        }
        map.end()
    }
}

impl Serialize for ModelFile<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(Some(4))?;
        map.serialize_entry("version", &1)?;
        map.serialize_entry("input_dim", &self.model.input_dim)?;
        map.serialize_entry("hidden", &self.model.hidden)?;
        map.serialize_entry("weights", &Blocks(self.model))?;
        map.end()
    }
}

#[derive(Debug, Clone)]
struct StepCache {
    x: Vec<f64>,
    h_prev: Vec<f64>,
    c_prev: Vec<f64>,
    gates: [Vec<f64>; 4],
    tanh_c: Vec<f64>,
}

/// Forward pass record.
#[derive(Debug, Clone)]
pub struct Trace {
    steps: Vec<StepCache>,
    pub last: LstmState,
    pub logits: Vec<f64>,
}

/// Gradient accumulator in the model's flat layout.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub values: Vec<f64>,
}

impl Gradients {
    pub fn for_model(model: &LstmModel) -> Self {
        Self { values: vec![0.0; model.params.len()] }
    }

    pub fn clear(&mut self) {
        self.values.iter_mut().for_each(|v| *v = 0.0);
    }

    pub fn norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate() {
        if *v > values[best] {
            best = i;
        }
    }
    best
}

pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|z| (z - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

/// Final-state logits for a whole sequence.
pub fn forward(seq: &FeatureSeq, model: &LstmModel) -> Result<Vec<f64>, GestureError> {
    model.check_sequence(seq)?;
    let mut state = LstmState::zeros(model.hidden);
    for x in seq.rows() {
        state = model.step(&state, x)?;
    }
    Ok(model.logits(&state.h))
}

/// Softmax cross-entropy, computed stably via log-sum-exp.
pub fn loss(logits: &[f64], label: usize) -> Result<f64, GestureError> {
    if label >= logits.len() {
        return Err(GestureError::Shape(format!("label {label} out of range for {} logits", logits.len())));
    }
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lse = max + logits.iter().map(|z| (z - max).exp()).sum::<f64>().ln();
    Ok(lse - logits[label])
}
