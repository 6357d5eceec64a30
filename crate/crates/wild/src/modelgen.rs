//! Seeded construction of random workflow models over synthetic devices.
//! The oracle tests and the load harness both need arbitrary but
//! well-formed models whose runs are predictable: every atomic activity
//! acts on its own device, and every conditional has exactly one branch
//! whose guard holds, decided by a device preset at world setup.

use std::fmt::Write as _;

use rand_chacha::ChaCha8Rng;
use rand::{Rng, SeedableRng};

use crate::vocab::ssn;

/// A generated model document plus the device documents its run needs.
#[derive(Debug, Clone)]
pub struct GeneratedWorkflow {
    /// Turtle text of the model document; the workflow subject is `#wf`.
    pub text: String,
    /// Device document name and initial value, relative to the device
    /// container the caller hosts them in.
    pub presets: Vec<(String, String)>,
    /// Number of atomic activities in the tree.
    pub atomics: usize,
}

struct Gen {
    rng: ChaCha8Rng,
    body: String,
    presets: Vec<(String, String)>,
    next_node: usize,
    atomics: usize,
    device_base: String,
}

/// Builds a random workflow model with at most `max_activities` atomic
/// activities. `device_base` is the container URI device documents will
/// live under (with trailing slash). Same seed, same output.
pub fn generate(seed: u64, device_base: &str, max_activities: usize) -> GeneratedWorkflow {
    assert!(max_activities >= 1);
    let mut g = Gen {
        rng: ChaCha8Rng::seed_from_u64(seed),
        body: String::new(),
        presets: Vec::new(),
        next_node: 0,
        atomics: 0,
        device_base: device_base.to_string(),
    };
    let budget = g.rng.gen_range(1..=max_activities);
    let root = g.node(budget, 0);
    let mut text = String::from(
        "@prefix wild: <http://purl.org/wild/vocab#> .\n\
         @prefix sp: <http://spinrdf.org/sp#> .\n\
         @prefix http: <http://www.w3.org/2011/http#> .\n\
         @prefix httpm: <http://www.w3.org/2011/http-methods#> .\n\n",
    );
    let _ = writeln!(text, "<#wf> a wild:Workflow ; wild:hasBehaviour <#{root}> .\n");
    text.push_str(&g.body);
    GeneratedWorkflow {
        text,
        presets: g.presets,
        atomics: g.atomics,
    }
}

impl Gen {
    fn fresh(&mut self) -> String {
        let n = self.next_node;
        self.next_node += 1;
        format!("n{n}")
    }

    /// Emits one activity able to hold `budget` atomics at most, depth
    /// capped so child lists stay small.
    fn node(&mut self, budget: usize, depth: usize) -> String {
        if budget <= 1 || depth >= 3 || self.rng.gen_bool(0.3) {
            return self.atomic();
        }
        let kinds = ["Sequential", "Parallel", "Conditional"];
        let kind = kinds[self.rng.gen_range(0..kinds.len())];
        let width = self.rng.gen_range(2..=budget.min(3));
        // Split the remaining budget across children, each at least 1.
        let mut shares = vec![1usize; width];
        let mut extra = budget - width;
        while extra > 0 {
            let k = self.rng.gen_range(0..width);
            shares[k] += 1;
            extra -= 1;
        }
        let children: Vec<String> = shares
            .iter()
            .map(|share| self.node(*share, depth + 1))
            .collect();
        let name = self.fresh();
        if kind == "Conditional" {
            let chosen = self.rng.gen_range(0..children.len());
            for (k, child) in children.iter().enumerate() {
                let guard = format!("g{name}x{k}");
                self.presets
                    .push((guard.clone(), if k == chosen { "go" } else { "stop" }.to_string()));
                let _ = writeln!(
                    self.body,
                    "<#{child}> wild:hasPrecondition [ sp:text \"{}\" ] .",
                    self.ask(&guard, "go")
                );
            }
        }
        let list = children
            .iter()
            .map(|c| format!("<#{c}>"))
            .collect::<Vec<_>>()
            .join(" ");
        let _ = writeln!(
            self.body,
            "<#{name}> a wild:{kind}Activity ; wild:hasChildActivities ( {list} ) .\n"
        );
        name
    }

    fn atomic(&mut self) -> String {
        let name = self.fresh();
        let device = format!("d{name}");
        self.presets.push((device.clone(), "off".to_string()));
        self.atomics += 1;
        let _ = writeln!(
            self.body,
            "<#{name}> a wild:AtomicActivity ;\n  \
               wild:hasPostcondition [ sp:text \"{post}\" ] ;\n  \
               wild:hasHttpRequest [ http:mthd httpm:PUT ;\n    \
                 http:requestURI <{dev}> ;\n    \
                 http:body \"<> <{val}> \\\"on\\\" .\" ] .\n",
            post = self.ask(&device, "on"),
            dev = self.device_uri(&device),
            val = ssn::HAS_VALUE,
        );
        name
    }

    fn device_uri(&self, device: &str) -> String {
        format!("{}{device}", self.device_base)
    }

    /// ASK text as it must appear inside a double-quoted Turtle literal.
    fn ask(&self, device: &str, value: &str) -> String {
        format!(
            "ASK {{ <{}> <{}> \\\"{value}\\\" }}",
            self.device_uri(device),
            ssn::HAS_VALUE,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rdf::{parse_turtle, Term};
    use crate::semantics::{validate_model, WorkflowModel};

    #[test]
    fn generated_models_parse_and_validate() {
        for seed in 0..40 {
            let gen = generate(seed, "http://b.test/dev/", 8);
            let g = parse_turtle(&gen.text, Some("http://b.test/models/m"))
                .unwrap_or_else(|e| panic!("seed {seed}: {e}\n{}", gen.text));
            let wf = Term::iri("http://b.test/models/m#wf");
            let report = validate_model(&g, &wf);
            assert!(
                report.is_valid(),
                "seed {seed}: {:?}\n{}",
                report.violations,
                gen.text
            );
            let model = WorkflowModel::from_graph(&g, &wf).unwrap();
            assert_eq!(model.atomics().count(), gen.atomics);
            // Every atomic is executable and observable.
            assert!(model
                .atomics()
                .all(|a| a.request.is_some() && a.postcondition.is_some()));
        }
    }

    #[test]
    fn generation_is_deterministic_per_seed() {
        let a = generate(11, "http://b.test/dev/", 6);
        let b = generate(11, "http://b.test/dev/", 6);
        assert_eq!(a.text, b.text);
        assert_eq!(a.presets, b.presets);
        // Small models can collide between neighbouring seeds; across a
        // batch the texts must still vary.
        let distinct: std::collections::BTreeSet<String> = (0..20)
            .map(|seed| generate(seed, "http://b.test/dev/", 6).text)
            .collect();
        assert!(distinct.len() > 5);
    }

    #[test]
    fn conditionals_have_exactly_one_open_guard() {
        for seed in 0..60 {
            let gen = generate(seed, "http://b.test/dev/", 8);
            let guards: Vec<&(String, String)> =
                gen.presets.iter().filter(|(n, _)| n.starts_with('g')).collect();
            if guards.is_empty() {
                continue;
            }
            // Group by conditional node: guard names are g<node>x<k>.
            let mut by_node: std::collections::BTreeMap<&str, Vec<&str>> =
                std::collections::BTreeMap::new();
            for (name, value) in guards {
                let node = name.split('x').next().unwrap();
                by_node.entry(node).or_default().push(value);
            }
            for (node, values) in by_node {
                assert_eq!(
                    values.iter().filter(|v| **v == "go").count(),
                    1,
                    "seed {seed} node {node}"
                );
            }
        }
    }
}
