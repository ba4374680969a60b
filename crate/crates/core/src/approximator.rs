//! Small fully connected networks with hand-written backprop, plus the
//! pieces an off-policy actor-critic needs around them: momentum SGD,
//! Gumbel-Softmax sampling, a replay buffer and target-network syncing.

use rand::Rng;
use rand_distr::{Distribution, Gumbel};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
struct Dense {
    n_in: usize,
    n_out: usize,
    /// Row-major `n_out x n_in`.
    w: Vec<f64>,
    b: Vec<f64>,
}

/// Feed-forward net: ReLU on hidden layers, identity on the output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MlpJson", into = "MlpJson")]
pub struct Mlp {
    layers: Vec<Dense>,
}

#[derive(Serialize, Deserialize)]
struct MlpJson {
    sizes: Vec<usize>,
    params: Vec<f64>,
}

impl From<Mlp> for MlpJson {
    fn from(m: Mlp) -> Self {
        MlpJson { sizes: m.sizes(), params: m.params() }
    }
}

impl TryFrom<MlpJson> for Mlp {
    type Error = Error;

    fn try_from(j: MlpJson) -> Result<Self> {
        let mut m = Mlp::zeros(&j.sizes)?;
        m.set_params(&j.params)?;
        Ok(m)
    }
}

/// Layer activations from a forward pass, reused by `backward`.
#[derive(Debug, Clone, Default)]
pub struct Cache {
    acts: Vec<Vec<f64>>,
}

impl Cache {
    pub fn output(&self) -> &[f64] {
        self.acts.last().map_or(&[], Vec::as_slice)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    dw: Vec<Vec<f64>>,
    db: Vec<Vec<f64>>,
}

impl Gradients {
    pub fn zero(&mut self) {
        self.dw.iter_mut().chain(self.db.iter_mut()).for_each(|v| v.fill(0.0));
    }

    pub fn scale(&mut self, k: f64) {
        self.dw.iter_mut().chain(self.db.iter_mut()).flatten().for_each(|v| *v *= k);
    }

    /// Flattened in the same order as [`Mlp::params`].
    pub fn flat(&self) -> Vec<f64> {
        self.dw.iter().zip(&self.db).flat_map(|(w, b)| w.iter().chain(b).copied()).collect()
    }
}

impl Mlp {
    /// Glorot-uniform weights, zero biases.
    pub fn new<R: Rng + ?Sized>(sizes: &[usize], rng: &mut R) -> Result<Self> {
        let mut m = Self::zeros(sizes)?;
        for l in &mut m.layers {
            let bound = (6.0 / (l.n_in + l.n_out) as f64).sqrt();
            l.w.iter_mut().for_each(|w| *w = rng.random_range(-bound..bound));
        }
        Ok(m)
    }

    pub fn zeros(sizes: &[usize]) -> Result<Self> {
        if sizes.len() < 2 || sizes.contains(&0) {
            return Err(Error::Dimension(format!("invalid layer sizes {sizes:?}")));
        }
        let layers = sizes
            .windows(2)
            .map(|p| Dense { n_in: p[0], n_out: p[1], w: vec![0.0; p[0] * p[1]], b: vec![0.0; p[1]] })
            .collect();
        Ok(Self { layers })
    }

    pub fn sizes(&self) -> Vec<usize> {
        std::iter::once(self.layers[0].n_in).chain(self.layers.iter().map(|l| l.n_out)).collect()
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].n_in
    }

    pub fn output_dim(&self) -> usize {
        self.layers[self.layers.len() - 1].n_out
    }

    pub fn n_params(&self) -> usize {
        self.layers.iter().map(|l| l.w.len() + l.b.len()).sum()
    }

    /// Weights then biases, layer by layer.
    pub fn params(&self) -> Vec<f64> {
        self.layers.iter().flat_map(|l| l.w.iter().chain(&l.b).copied()).collect()
    }

    pub fn set_params(&mut self, p: &[f64]) -> Result<()> {
        if p.len() != self.n_params() {
            return Err(Error::Dimension(format!("expected {} parameters, got {}", self.n_params(), p.len())));
        }
        if p.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("network parameters"));
        }
        let mut k = 0;
        for l in &mut self.layers {
            for v in l.w.iter_mut().chain(l.b.iter_mut()) {
                *v = p[k];
                k += 1;
            }
        }
        Ok(())
    }

    pub fn is_finite(&self) -> bool {
        self.layers.iter().all(|l| l.w.iter().chain(&l.b).all(|v| v.is_finite()))
    }

    pub fn gradients(&self) -> Gradients {
        Gradients {
            dw: self.layers.iter().map(|l| vec![0.0; l.w.len()]).collect(),
            db: self.layers.iter().map(|l| vec![0.0; l.b.len()]).collect(),
        }
    }

    pub fn forward(&self, x: &[f64]) -> Result<(Vec<f64>, Cache)> {
        let mut cache = Cache::default();
        self.forward_into(x, &mut cache)?;
        Ok((cache.output().to_vec(), cache))
    }

    /// Forward pass reusing `cache`'s buffers; the output is
    /// `cache.output()`.
    pub fn forward_into(&self, x: &[f64], cache: &mut Cache) -> Result<()> {
        if x.len() != self.input_dim() {
            return Err(Error::Dimension(format!("input has {} features, net expects {}", x.len(), self.input_dim())));
        }
        cache.acts.resize_with(self.layers.len() + 1, Vec::new);
        cache.acts[0].clear();
        cache.acts[0].extend_from_slice(x);
        let last = self.layers.len() - 1;
        for (li, l) in self.layers.iter().enumerate() {
            let (head, tail) = cache.acts.split_at_mut(li + 1);
            let input = &head[li];
            let out = &mut tail[0];
            out.clear();
            out.extend_from_slice(&l.b);
            for (o, row) in out.iter_mut().zip(l.w.chunks_exact(l.n_in)) {
                *o += row.iter().zip(input).map(|(w, v)| w * v).sum::<f64>();
                if li != last && *o < 0.0 {
                    *o = 0.0;
                }
            }
        }
        Ok(())
    }

    /// Gradients of `dy . y(x)` with respect to every parameter.
    pub fn backward(&self, cache: &Cache, dy: &[f64]) -> Result<Gradients> {
        let mut g = self.gradients();
        self.backward_accumulate(cache, dy, &mut g)?;
        Ok(g)
    }

    /// Adds this sample's gradients into `grads`.
    pub fn backward_accumulate(&self, cache: &Cache, dy: &[f64], grads: &mut Gradients) -> Result<()> {
        if dy.len() != self.output_dim() || cache.acts.len() != self.layers.len() + 1 {
            return Err(Error::Dimension("output gradient or cache does not match the net".into()));
        }
        let mut delta = dy.to_vec();
        for li in (0..self.layers.len()).rev() {
            let l = &self.layers[li];
            let input = &cache.acts[li];
            let (dw, db) = (&mut grads.dw[li], &mut grads.db[li]);
            for (o, &d) in delta.iter().enumerate() {
                if d == 0.0 {
                    continue;
                }
                db[o] += d;
                for (g, &v) in dw[o * l.n_in..(o + 1) * l.n_in].iter_mut().zip(input) {
                    *g += d * v;
                }
            }
            if li == 0 {
                break;
            }
            let mut prev = vec![0.0; l.n_in];
            for (o, &d) in delta.iter().enumerate() {
                if d == 0.0 {
                    continue;
                }
                for (p, &w) in prev.iter_mut().zip(&l.w[o * l.n_in..(o + 1) * l.n_in]) {
                    *p += d * w;
                }
            }
            // ReLU derivative from the stored post-activation.
            for (p, &a) in prev.iter_mut().zip(input) {
                if a <= 0.0 {
                    *p = 0.0;
                }
            }
            delta = prev;
        }
        Ok(())
    }

    fn apply(&mut self, grads: &Gradients, mut f: impl FnMut(usize, &mut f64, f64)) {
        let mut k = 0;
        for (li, l) in self.layers.iter_mut().enumerate() {
            for (p, &g) in l.w.iter_mut().zip(&grads.dw[li]).chain(l.b.iter_mut().zip(&grads.db[li])) {
                f(k, p, g);
                k += 1;
            }
        }
    }
}

/// Plain gradient descent: `p <- p - lr * g`.
pub fn sgd_step(net: &mut Mlp, grads: &Gradients, lr: f64) {
    net.apply(grads, |_, p, g| *p -= lr * g);
}

/// Heavy-ball momentum: `v <- mu * v + g`, `p <- p - lr * v`.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentumSgd {
    pub lr: f64,
    pub momentum: f64,
    velocity: Vec<f64>,
}

impl MomentumSgd {
    pub fn new(net: &Mlp, lr: f64, momentum: f64) -> Self {
        Self { lr, momentum, velocity: vec![0.0; net.n_params()] }
    }

    pub fn step(&mut self, net: &mut Mlp, grads: &Gradients) {
        let (lr, mu) = (self.lr, self.momentum);
        let vel = &mut self.velocity;
        net.apply(grads, |k, p, g| {
            vel[k] = mu * vel[k] + g;
            *p -= lr * vel[k];
        });
    }
}

pub fn hard_sync(online: &Mlp, target: &mut Mlp) {
    target.clone_from(online);
}

/// `target <- (1 - tau) * target + tau * online`.
pub fn soft_sync(online: &Mlp, target: &mut Mlp, tau: f64) {
    for (t, o) in target.layers.iter_mut().zip(&online.layers) {
        for (a, b) in t.w.iter_mut().zip(&o.w).chain(t.b.iter_mut().zip(&o.b)) {
            *a = (1.0 - tau) * *a + tau * b;
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum TargetSync {
    /// Copy every `interval` learner updates.
    Hard { interval: usize },
    /// Polyak averaging after every update.
    Soft { tau: f64 },
}

impl TargetSync {
    pub fn apply(&self, update: usize, online: &Mlp, target: &mut Mlp) {
        match *self {
            Self::Hard { interval } => {
                if interval > 0 && update.is_multiple_of(interval) {
                    hard_sync(online, target);
                }
            }
            Self::Soft { tau } => soft_sync(online, target, tau),
        }
    }
}

pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let m = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = logits.iter().map(|v| (v - m).exp()).collect();
    let z: f64 = e.iter().sum();
    e.into_iter().map(|v| v / z).collect()
}

/// Index of the largest entry; ties go to the lowest index.
pub fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate().skip(1) {
        if x > v[best] {
            best = i;
        }
    }
    best
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GumbelConfig {
    pub initial: f64,
    pub final_temperature: f64,
    pub steps: usize,
    pub mode: GumbelMode,
}

impl Default for GumbelConfig {
    fn default() -> Self {
        Self { initial: 1.0, final_temperature: 0.1, steps: 10_000, mode: GumbelMode::StraightThrough }
    }
}

impl GumbelConfig {
    /// Linear anneal from `initial` to `final_temperature` over `steps`.
    pub fn temperature(&self, step: usize) -> f64 {
        let t = (step as f64 / self.steps.max(1) as f64).min(1.0);
        self.initial + (self.final_temperature - self.initial) * t
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GumbelMode {
    /// One-hot of the hard sample forward, relaxed gradient backward.
    StraightThrough,
    /// The relaxed vector both ways.
    Soft,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GumbelSample {
    pub relaxed: Vec<f64>,
    pub hard: usize,
    pub temperature: f64,
}

impl GumbelSample {
    /// The action vector fed downstream under `mode`.
    pub fn action_vector(&self, mode: GumbelMode) -> Vec<f64> {
        match mode {
            GumbelMode::Soft => self.relaxed.clone(),
            GumbelMode::StraightThrough => {
                let mut v = vec![0.0; self.relaxed.len()];
                v[self.hard] = 1.0;
                v
            }
        }
    }

    /// Gradient with respect to the logits given the gradient with respect
    /// to the action vector. Both modes backpropagate through the relaxed
    /// softmax.
    pub fn backward(&self, d_action: &[f64]) -> Vec<f64> {
        let inner: f64 = d_action.iter().zip(&self.relaxed).map(|(d, p)| d * p).sum();
        self.relaxed
            .iter()
            .zip(d_action)
            .map(|(p, d)| p * (d - inner) / self.temperature)
            .collect()
    }
}

/// Perturbs the logits with i.i.d. standard Gumbel noise; the relaxed
/// vector is the tempered softmax of the perturbed logits and the hard
/// index their argmax, which is an exact categorical sample.
pub fn gumbel_softmax_sample<R: Rng + ?Sized>(logits: &[f64], temperature: f64, rng: &mut R) -> Result<GumbelSample> {
    if temperature.is_nan() || temperature <= 0.0 {
        return Err(Error::Parameter(format!("temperature {temperature} must be positive")));
    }
    if logits.is_empty() {
        return Err(Error::Dimension("no logits".into()));
    }
    let gumbel = Gumbel::new(0.0, 1.0).expect("unit Gumbel");
    let perturbed: Vec<f64> = logits.iter().map(|l| l + gumbel.sample(rng)).collect();
    let hard = argmax(&perturbed);
    let scaled: Vec<f64> = perturbed.iter().map(|v| v / temperature).collect();
    Ok(GumbelSample { relaxed: softmax(&scaled), hard, temperature })
}

/// Fixed-capacity FIFO ring.
#[derive(Debug, Clone)]
pub struct ReplayBuffer<T> {
    capacity: usize,
    items: Vec<T>,
    next: usize,
    inserted: u64,
}

impl<T> ReplayBuffer<T> {
    pub fn new(capacity: usize) -> Self {
        assert!(capacity > 0, "replay capacity must be positive");
        Self { capacity, items: Vec::with_capacity(capacity.min(1 << 16)), next: 0, inserted: 0 }
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn inserted(&self) -> u64 {
        self.inserted
    }

    pub fn push(&mut self, item: T) {
        if self.items.len() < self.capacity {
            self.items.push(item);
        } else {
            self.items[self.next] = item;
        }
        self.next = (self.next + 1) % self.capacity;
        self.inserted += 1;
    }

    /// Uniform sample with replacement.
    pub fn sample<R: Rng + ?Sized>(&self, batch: usize, rng: &mut R) -> Result<Vec<&T>> {
        if self.items.is_empty() {
            return Err(Error::EmptyBuffer);
        }
        Ok((0..batch).map(|_| &self.items[rng.random_range(0..self.items.len())]).collect())
    }

    /// Oldest first.
    pub fn iter(&self) -> impl Iterator<Item = &T> {
        let split = if self.items.len() < self.capacity { 0 } else { self.next };
        self.items[split..].iter().chain(&self.items[..split])
    }
}
