use std::collections::BTreeMap;

use gauss4d_core::{Error, Real, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type ParamId = usize;

/// How a tensor is initialised.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Init {
    /// Uniform in `±gain / sqrt(fan_in)`.
    Uniform { fan_in: usize, gain: f64 },
    Const(f64),
    /// Per-channel constants, cycled over the tensor.
    PerChannel(&'static [f64]),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParamSpec {
    pub name: String,
    pub shape: Vec<usize>,
    pub init: Init,
}

impl ParamSpec {
    pub fn numel(&self) -> usize {
        self.shape.iter().product()
    }
}

/// Ordered list of named parameter shapes for one architecture.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Layout {
    pub specs: Vec<ParamSpec>,
}

impl Layout {
    pub fn add(&mut self, name: impl Into<String>, shape: &[usize], init: Init) -> ParamId {
        let name = name.into();
        debug_assert!(self.specs.iter().all(|s| s.name != name), "duplicate parameter {name}");
        self.specs.push(ParamSpec {
            name,
            shape: shape.to_vec(),
            init,
        });
        self.specs.len() - 1
    }

    pub fn total(&self) -> usize {
        self.specs.iter().map(|s| s.numel()).sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParamTensor<T = f32> {
    pub name: String,
    pub shape: Vec<usize>,
    pub data: Vec<T>,
}

/// Every learnable tensor of a model, in layout order and addressable by name.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams<T = f32> {
    pub tensors: Vec<ParamTensor<T>>,
    index: BTreeMap<String, usize>,
}

impl<T: Real> ModelParams<T> {
    pub fn from_tensors(tensors: Vec<ParamTensor<T>>) -> Result<Self> {
        let mut index = BTreeMap::new();
        for (i, t) in tensors.iter().enumerate() {
            if t.shape.iter().product::<usize>() != t.data.len() {
                return Err(Error::shape(
                    "parameter elements",
                    t.shape.iter().product::<usize>(),
                    t.data.len(),
                ));
            }
            if index.insert(t.name.clone(), i).is_some() {
                return Err(Error::Malformed(format!("duplicate parameter {}", t.name)));
            }
        }
        Ok(ModelParams { tensors, index })
    }

    /// Draws every tensor from its initialiser; each tensor gets its own
    /// stream derived from `seed` and its name, so adding layers does not
    /// perturb the others.
    pub fn init(layout: &Layout, seed: u64) -> Self {
        let tensors = layout
            .specs
            .iter()
            .map(|s| ParamTensor {
                name: s.name.clone(),
                shape: s.shape.clone(),
                data: init_tensor(s, seed),
            })
            .collect();
        Self::from_tensors(tensors).expect("layout names are unique")
    }

    pub fn zeros(layout: &Layout) -> Self {
        let tensors = layout
            .specs
            .iter()
            .map(|s| ParamTensor {
                name: s.name.clone(),
                shape: s.shape.clone(),
                data: vec![T::zero(); s.numel()],
            })
            .collect();
        Self::from_tensors(tensors).expect("layout names are unique")
    }

    pub fn zeros_like(&self) -> Self {
        ModelParams {
            tensors: self
                .tensors
                .iter()
                .map(|t| ParamTensor {
                    name: t.name.clone(),
                    shape: t.shape.clone(),
                    data: vec![T::zero(); t.data.len()],
                })
                .collect(),
            index: self.index.clone(),
        }
    }

    pub fn len(&self) -> usize {
        self.tensors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tensors.is_empty()
    }

    pub fn numel(&self) -> usize {
        self.tensors.iter().map(|t| t.data.len()).sum()
    }

    pub fn id(&self, name: &str) -> Option<ParamId> {
        self.index.get(name).copied()
    }

    pub fn get(&self, id: ParamId) -> &[T] {
        &self.tensors[id].data
    }

    pub fn get_mut(&mut self, id: ParamId) -> &mut [T] {
        &mut self.tensors[id].data
    }

    pub fn by_name(&self, name: &str) -> Option<&ParamTensor<T>> {
        self.id(name).map(|i| &self.tensors[i])
    }

    /// Checks names and shapes against `layout` (same order).
    pub fn check_layout(&self, layout: &Layout) -> Result<()> {
        if self.tensors.len() != layout.specs.len() {
            return Err(Error::shape("parameter tensors", layout.specs.len(), self.tensors.len()));
        }
        for (t, s) in self.tensors.iter().zip(&layout.specs) {
            if t.name != s.name {
                return Err(Error::Malformed(format!("expected parameter {}, found {}", s.name, t.name)));
            }
            if t.shape != s.shape {
                return Err(Error::Malformed(format!(
                    "parameter {} has shape {:?}, expected {:?}",
                    t.name, t.shape, s.shape
                )));
            }
        }
        Ok(())
    }

    pub fn add_assign(&mut self, other: &ModelParams<T>) {
        for (a, b) in self.tensors.iter_mut().zip(&other.tensors) {
            for (x, y) in a.data.iter_mut().zip(&b.data) {
                *x += *y;
            }
        }
    }

    pub fn scale(&mut self, k: T) {
        for t in self.tensors.iter_mut() {
            for x in t.data.iter_mut() {
                *x *= k;
            }
        }
    }

    pub fn is_finite(&self) -> bool {
        self.tensors.iter().all(|t| t.data.iter().all(|v| v.is_finite()))
    }

    pub fn max_abs(&self) -> f64 {
        self.tensors
            .iter()
            .flat_map(|t| t.data.iter())
            .fold(0.0, |m, v| m.max(v.abs().f64()))
    }

    /// Zeroes every tensor for which `keep(name)` is false.
    pub fn mask(&mut self, keep: impl Fn(&str) -> bool) {
        for t in self.tensors.iter_mut() {
            if !keep(&t.name) {
                t.data.iter_mut().for_each(|v| *v = T::zero());
            }
        }
    }

    pub fn cast<U: Real>(&self) -> ModelParams<U> {
        ModelParams {
            tensors: self
                .tensors
                .iter()
                .map(|t| ParamTensor {
                    name: t.name.clone(),
                    shape: t.shape.clone(),
                    data: t.data.iter().map(|v| U::of(v.f64())).collect(),
                })
                .collect(),
            index: self.index.clone(),
        }
    }

    /// Flat `(tensor, element)` addressing, in layout order.
    pub fn locate(&self, mut flat: usize) -> (ParamId, usize) {
        for (i, t) in self.tensors.iter().enumerate() {
            if flat < t.data.len() {
                return (i, flat);
            }
            flat -= t.data.len();
        }
        panic!("flat parameter index out of range");
    }
}

fn name_hash(name: &str) -> u64 {
    // FNV-1a
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in name.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

fn init_tensor<T: Real>(spec: &ParamSpec, seed: u64) -> Vec<T> {
    let n = spec.numel();
    match spec.init {
        Init::Const(v) => vec![T::of(v); n],
        Init::PerChannel(vals) => (0..n).map(|i| T::of(vals[i % vals.len()])).collect(),
        Init::Uniform { fan_in, gain } => {
            let bound = gain / (fan_in.max(1) as f64).sqrt();
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ name_hash(&spec.name));
            (0..n).map(|_| T::of(rng.random_range(-bound..=bound))).collect()
        }
    }
}
