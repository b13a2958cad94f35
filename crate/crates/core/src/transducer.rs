//! Probabilistic transducers: (S, Σ, Σ', F) with sampling, exact rows and composition.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::TransducerError;

/// Row-sum tolerance used by validation.
pub const TOLERANCE: f64 = 1e-9;

/// One outcome of a transition row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Outcome {
    pub state: String,
    pub output: String,
    pub p: f64,
}

/// One row of the transition table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub state: String,
    pub input: String,
    pub outcomes: Vec<Outcome>,
}

/// Declarative description, also the config-file form.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct TransducerSpec {
    pub states: Vec<String>,
    pub inputs: Vec<String>,
    pub outputs: Vec<String>,
    #[serde(default)]
    pub rows: Vec<Row>,
}

/// Finite distribution over (state, output) pairs, sorted by key.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Distribution {
    pub entries: Vec<((String, String), f64)>,
}

impl Distribution {
    pub fn total(&self) -> f64 {
        self.entries.iter().map(|(_, p)| p).sum()
    }

    pub fn prob(&self, state: &str, output: &str) -> f64 {
        self.entries
            .iter()
            .find(|((s, o), _)| s == state && o == output)
            .map_or(0.0, |(_, p)| *p)
    }

    /// Output marginal, summing over next states.
    pub fn output_marginal(&self) -> BTreeMap<String, f64> {
        let mut m = BTreeMap::new();
        for ((_, o), p) in &self.entries {
            *m.entry(o.clone()).or_insert(0.0) += p;
        }
        m
    }
}

/// A validated, immutable transducer.
#[derive(Debug, Clone, PartialEq)]
pub struct Transducer {
    states: BTreeSet<String>,
    inputs: BTreeSet<String>,
    outputs: BTreeSet<String>,
    rows: BTreeMap<(String, String), Distribution>,
}

/// Validate a spec and build a transducer.
pub fn make_transducer(spec: &TransducerSpec) -> Result<Transducer, TransducerError> {
    let states: BTreeSet<String> = spec.states.iter().cloned().collect();
    let inputs: BTreeSet<String> = spec.inputs.iter().cloned().collect();
    let outputs: BTreeSet<String> = spec.outputs.iter().cloned().collect();
    let mut rows = BTreeMap::new();
    for row in &spec.rows {
        if !states.contains(&row.state) {
            return Err(TransducerError::UnknownSymbol(row.state.clone()));
        }
        if !inputs.contains(&row.input) {
            return Err(TransducerError::UnknownSymbol(row.input.clone()));
        }
        let key = (row.state.clone(), row.input.clone());
        if rows.contains_key(&key) {
            return Err(TransducerError::DuplicateRow(row.state.clone(), row.input.clone()));
        }
        let mut entries: BTreeMap<(String, String), f64> = BTreeMap::new();
        for o in &row.outcomes {
            if !states.contains(&o.state) {
                return Err(TransducerError::UnknownSymbol(o.state.clone()));
            }
            if !outputs.contains(&o.output) {
                return Err(TransducerError::UnknownSymbol(o.output.clone()));
            }
            if !(0.0..=1.0).contains(&o.p) {
                return Err(TransducerError::NonStochastic {
                    state: row.state.clone(),
                    input: row.input.clone(),
                    sum: o.p,
                });
            }
            let k = (o.state.clone(), o.output.clone());
            if entries.insert(k, o.p).is_some() {
                return Err(TransducerError::DuplicateOutcome(o.state.clone(), o.output.clone()));
            }
        }
        let dist = Distribution { entries: entries.into_iter().collect() };
        let sum = dist.total();
        if (sum - 1.0).abs() > TOLERANCE {
            return Err(TransducerError::NonStochastic {
                state: row.state.clone(),
                input: row.input.clone(),
                sum,
            });
        }
        rows.insert(key, dist);
    }
    Ok(Transducer { states, inputs, outputs, rows })
}

impl Transducer {
    pub fn states(&self) -> &BTreeSet<String> {
        &self.states
    }

    pub fn inputs(&self) -> &BTreeSet<String> {
        &self.inputs
    }

    pub fn outputs(&self) -> &BTreeSet<String> {
        &self.outputs
    }

    /// Iterate over all defined rows.
    pub fn rows(&self) -> impl Iterator<Item = (&(String, String), &Distribution)> {
        self.rows.iter()
    }

    /// Exact transition row for `(state, input)`.
    pub fn output_distribution(&self, state: &str, input: &str) -> Result<&Distribution, TransducerError> {
        self.rows
            .get(&(state.to_string(), input.to_string()))
            .ok_or_else(|| TransducerError::MissingRow(state.to_string(), input.to_string()))
    }

    /// Sample one (state, output) pair. Consumes exactly one draw.
    pub fn step<R: Rng + ?Sized>(
        &self,
        state: &str,
        input: &str,
        rng: &mut R,
    ) -> Result<(String, String), TransducerError> {
        let dist = self.output_distribution(state, input)?;
        let u: f64 = rng.gen();
        let mut acc = 0.0;
        let mut last = None;
        for ((s, o), p) in &dist.entries {
            if *p <= 0.0 {
                continue;
            }
            acc += p;
            last = Some((s, o));
            if u < acc {
                return Ok((s.clone(), o.clone()));
            }
        }
        // u landed in the rounding slack above the accumulated sum
        let (s, o) = last.expect("validated row has positive mass");
        Ok((s.clone(), o.clone()))
    }

    /// Identity transducer: one state, relays every symbol unchanged.
    pub fn identity<I, S>(alphabet: I) -> Transducer
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let syms: Vec<String> = alphabet.into_iter().map(Into::into).collect();
        let spec = TransducerSpec {
            states: vec!["id".into()],
            inputs: syms.clone(),
            outputs: syms.clone(),
            rows: syms
                .iter()
                .map(|s| Row {
                    state: "id".into(),
                    input: s.clone(),
                    outcomes: vec![Outcome { state: "id".into(), output: s.clone(), p: 1.0 }],
                })
                .collect(),
        };
        make_transducer(&spec).expect("identity spec is valid")
    }
}

/// Canonical name for a product state.
pub fn pair_state(s1: &str, s2: &str) -> String {
    format!("({s1},{s2})")
}

/// Serial composition: t1's outputs feed t2's inputs.
///
/// A composed row exists for ((s1,s2), σ1) when t1 has the row and t2 has a row for every
/// intermediate symbol t1 can emit from it.
pub fn compose(t1: &Transducer, t2: &Transducer) -> Result<Transducer, TransducerError> {
    if t1.outputs != t2.inputs {
        return Err(TransducerError::AlphabetMismatch);
    }
    let mut states = BTreeSet::new();
    for s1 in &t1.states {
        for s2 in &t2.states {
            states.insert(pair_state(s1, s2));
        }
    }
    let s1_names: Vec<&String> = t1.states.iter().collect();
    let s2_names: Vec<&String> = t2.states.iter().collect();
    let out_names: Vec<&String> = t2.outputs.iter().collect();
    let index = |names: &[&String]| -> HashMap<String, usize> {
        names.iter().enumerate().map(|(i, n)| ((*n).clone(), i)).collect()
    };
    let (i1, i2, io) = (index(&s1_names), index(&s2_names), index(&out_names));
    // t2 rows with next state and output as indices
    let t2_rows: HashMap<(&str, &str), Vec<(usize, f64)>> = t2
        .rows
        .iter()
        .map(|((s, a), d)| {
            let e = d.entries.iter().map(|((n, o), p)| (i2[n] * out_names.len() + io[o], *p)).collect();
            ((s.as_str(), a.as_str()), e)
        })
        .collect();
    let width = s2_names.len() * out_names.len();
    let mut acc = vec![0.0; s1_names.len() * width];
    let mut rows = BTreeMap::new();
    for ((s1, sigma1), d1) in &t1.rows {
        'pair: for s2 in &t2.states {
            acc.iter_mut().for_each(|x| *x = 0.0);
            for ((s1n, mid), p1) in &d1.entries {
                if *p1 == 0.0 {
                    continue;
                }
                let Some(d2) = t2_rows.get(&(s2.as_str(), mid.as_str())) else {
                    continue 'pair;
                };
                let base = i1[s1n] * width;
                for &(k, p2) in d2 {
                    acc[base + k] += p1 * p2;
                }
            }
            let mut entries = Vec::new();
            for (k, &p) in acc.iter().enumerate() {
                if p != 0.0 {
                    let (a, rest) = (k / width, k % width);
                    let (b, o) = (rest / out_names.len(), rest % out_names.len());
                    entries.push(((pair_state(s1_names[a], s2_names[b]), out_names[o].clone()), p));
                }
            }
            entries.sort_by(|x, y| x.0.cmp(&y.0));
            rows.insert((pair_state(s1, s2), sigma1.clone()), Distribution { entries });
        }
    }
    Ok(Transducer { states, inputs: t1.inputs.clone(), outputs: t2.outputs.clone(), rows })
}
