//! Petri-net oracle for workflow runs. A model compiles to a net whose
//! labelled transitions are exactly its atomic activities; composites
//! become net structure (sequencing glue, unlabelled fork and join,
//! shared-place choice). An observed run conforms when the sequence of
//! atomic completions is the labelled projection of some firing sequence,
//! and is complete when that sequence can end on the final marking.
//!
//! Two independent routes answer membership questions: [`conformance`]
//! simulates the set of markings reachable under the observed word, while
//! [`firing_sequences`] enumerates the whole language by token play.
//! Tests hold the two against each other.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::rdf::Term;
use crate::semantics::{ActivityKind, WorkflowModel};

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("state space exceeded {0} markings")]
    StateSpaceExceeded(usize),
}

/// One-safe net compiled from a workflow model tree.
#[derive(Debug, Clone)]
pub struct PetriNet {
    place_count: usize,
    transitions: Vec<Transition>,
    entry: usize,
    exit: usize,
}

#[derive(Debug, Clone)]
pub struct Transition {
    /// The atomic activity this firing observes; None for silent structure.
    pub label: Option<Term>,
    pub inputs: Vec<usize>,
    pub outputs: Vec<usize>,
}

pub type Marking = Vec<u8>;

impl PetriNet {
    pub fn place_count(&self) -> usize {
        self.place_count
    }

    pub fn transitions(&self) -> &[Transition] {
        &self.transitions
    }

    pub fn initial_marking(&self) -> Marking {
        let mut m = vec![0; self.place_count];
        m[self.entry] = 1;
        m
    }

    pub fn final_marking(&self) -> Marking {
        let mut m = vec![0; self.place_count];
        m[self.exit] = 1;
        m
    }

    fn fresh_place(&mut self) -> usize {
        let p = self.place_count;
        self.place_count += 1;
        p
    }

    fn enabled(&self, t: &Transition, m: &Marking) -> bool {
        t.inputs.iter().all(|p| m[*p] > 0)
    }

    fn fire(&self, t: &Transition, m: &Marking) -> Marking {
        let mut next = m.clone();
        for p in &t.inputs {
            next[*p] -= 1;
        }
        for p in &t.outputs {
            next[*p] += 1;
        }
        next
    }
}

/// Compiles the model tree into its net.
pub fn compile(model: &WorkflowModel) -> PetriNet {
    let mut net = PetriNet {
        place_count: 2,
        transitions: Vec::new(),
        entry: 0,
        exit: 1,
    };
    build(model, &model.root, 0, 1, &mut net);
    net
}

fn build(model: &WorkflowModel, node: &Term, entry: usize, exit: usize, net: &mut PetriNet) {
    let activity = model
        .activity(node)
        .expect("compiled models contain every tree node");
    match activity.kind {
        ActivityKind::Atomic => net.transitions.push(Transition {
            label: Some(node.clone()),
            inputs: vec![entry],
            outputs: vec![exit],
        }),
        ActivityKind::Sequential => {
            let mut from = entry;
            let last = activity.children.len() - 1;
            for (k, child) in activity.children.iter().enumerate() {
                let to = if k == last { exit } else { net.fresh_place() };
                build(model, child, from, to, net);
                from = to;
            }
        }
        ActivityKind::Parallel => {
            let mut starts = Vec::new();
            let mut ends = Vec::new();
            for child in &activity.children {
                let s = net.fresh_place();
                let e = net.fresh_place();
                build(model, child, s, e, net);
                starts.push(s);
                ends.push(e);
            }
            net.transitions.push(Transition {
                label: None,
                inputs: vec![entry],
                outputs: starts,
            });
            net.transitions.push(Transition {
                label: None,
                inputs: ends,
                outputs: vec![exit],
            });
        }
        ActivityKind::Conditional => {
            // All branches start from the shared entry place; firing any
            // branch's first transition resolves the choice.
            for child in &activity.children {
                build(model, child, entry, exit, net);
            }
        }
    }
}

/// Result of checking one observed completion sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Conformance {
    /// The word is a valid (labelled) firing prefix; `complete` says the
    /// final marking is among the possible outcomes.
    Conformant { complete: bool },
    /// The word's label at this position cannot fire in any reachable
    /// marking consistent with the prefix before it.
    Violation { position: usize },
}

impl Conformance {
    pub fn is_complete(&self) -> bool {
        matches!(self, Conformance::Conformant { complete: true })
    }
}

fn silent_closure(net: &PetriNet, mut set: BTreeSet<Marking>) -> BTreeSet<Marking> {
    let mut frontier: Vec<Marking> = set.iter().cloned().collect();
    while let Some(m) = frontier.pop() {
        for t in &net.transitions {
            if t.label.is_none() && net.enabled(t, &m) {
                let next = net.fire(t, &m);
                if set.insert(next.clone()) {
                    frontier.push(next);
                }
            }
        }
    }
    set
}

/// Replays `word` against the net, tracking every marking the net could
/// be in. Deterministic observations over a nondeterministic net.
pub fn conformance(net: &PetriNet, word: &[Term]) -> Conformance {
    let mut states = silent_closure(net, BTreeSet::from([net.initial_marking()]));
    for (position, label) in word.iter().enumerate() {
        let mut next = BTreeSet::new();
        for m in &states {
            for t in &net.transitions {
                if t.label.as_ref() == Some(label) && net.enabled(t, m) {
                    next.insert(net.fire(t, m));
                }
            }
        }
        if next.is_empty() {
            return Conformance::Violation { position };
        }
        states = silent_closure(net, next);
    }
    Conformance::Conformant {
        complete: states.contains(&net.final_marking()),
    }
}

/// Every labelled word of a complete run, by exhaustive token play.
/// Independent of [`conformance`]; used to cross-check it.
pub fn firing_sequences(
    net: &PetriNet,
    max_steps: usize,
) -> Result<BTreeSet<Vec<Term>>, OracleError> {
    let mut words = BTreeSet::new();
    let mut steps = 0usize;
    let final_marking = net.final_marking();
    let mut stack: Vec<(Marking, Vec<Term>)> = vec![(net.initial_marking(), Vec::new())];
    while let Some((marking, word)) = stack.pop() {
        steps += 1;
        if steps > max_steps {
            return Err(OracleError::StateSpaceExceeded(max_steps));
        }
        if marking == final_marking {
            words.insert(word.clone());
        }
        for t in &net.transitions {
            if net.enabled(t, &marking) {
                let mut next_word = word.clone();
                if let Some(label) = &t.label {
                    next_word.push(label.clone());
                }
                stack.push((net.fire(t, &marking), next_word));
            }
        }
    }
    Ok(words)
}

/// All markings reachable from the initial one.
pub fn reachable_markings(
    net: &PetriNet,
    max_states: usize,
) -> Result<BTreeSet<Marking>, OracleError> {
    let mut seen = BTreeSet::from([net.initial_marking()]);
    let mut frontier = vec![net.initial_marking()];
    while let Some(m) = frontier.pop() {
        for t in &net.transitions {
            if net.enabled(t, &m) {
                let next = net.fire(t, &m);
                if seen.insert(next.clone()) {
                    if seen.len() > max_states {
                        return Err(OracleError::StateSpaceExceeded(max_states));
                    }
                    frontier.push(next);
                }
            }
        }
    }
    Ok(seen)
}
