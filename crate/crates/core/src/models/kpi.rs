use serde_json::json;

use super::{Component, Model};
use crate::cube::Cube;
use crate::error::{Error, Result};

/// Half-open interval `[lo, hi)` with its label.
#[derive(Debug, Clone, PartialEq)]
pub struct KpiRule {
    pub lo: f64,
    pub hi: f64,
    pub label: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KpiRules {
    pub name: String,
    /// Measure the rules were written for, if restricted.
    pub measure: Option<String>,
    rules: Vec<KpiRule>,
}

impl KpiRules {
    pub fn new(name: &str, measure: Option<String>, mut rules: Vec<KpiRule>) -> Result<Self> {
        let bad = |msg: String| Error::model("kpi", format!("rules {name}: {msg}"));
        if rules.is_empty() {
            return Err(bad("no rules".into()));
        }
        for r in &rules {
            if !(r.lo < r.hi) {
                return Err(bad(format!("empty interval [{}, {}) for {}", r.lo, r.hi, r.label)));
            }
        }
        for (i, r) in rules.iter().enumerate() {
            if rules[..i].iter().any(|o| o.label == r.label) {
                return Err(bad(format!("label {} repeats", r.label)));
            }
        }
        let labels: Vec<String> = rules.iter().map(|r| r.label.clone()).collect();
        rules.sort_by(|a, b| a.lo.total_cmp(&b.lo));
        for w in rules.windows(2) {
            if w[0].hi > w[1].lo {
                return Err(bad(format!("intervals for {} and {} overlap", w[0].label, w[1].label)));
            }
        }
        // Keep declaration order for the label components.
        rules.sort_by_key(|r| labels.iter().position(|l| *l == r.label));
        Ok(KpiRules {
            name: name.to_string(),
            measure,
            rules,
        })
    }

    pub fn rules(&self) -> &[KpiRule] {
        &self.rules
    }

    pub fn label(&self, v: f64) -> Option<&str> {
        self.rules.iter().find(|r| r.lo <= v && v < r.hi).map(|r| r.label.as_str())
    }
}

/// Labels every cell with the interval containing its value.
pub fn kpi(cube: &Cube, measure: &str, rules: &KpiRules) -> Result<Model> {
    let values = cube.values(measure)?;
    let mut labels = Vec::with_capacity(values.len());
    for (c, v) in cube.cells().iter().zip(&values) {
        let l = rules.label(*v).ok_or_else(|| {
            Error::model("kpi", format!("value {v} of cell {:?} is not covered by rules {}", c.coords, rules.name))
        })?;
        labels.push(l.to_string());
    }
    let mut m = Model::new("kpi", cube, measure).bind("rules", &rules.name);
    m.characterize(
        "rules",
        json!(rules
            .rules
            .iter()
            .map(|r| json!({"lo": r.lo, "hi": if r.hi.is_finite() { json!(r.hi) } else { json!(null) }, "label": r.label}))
            .collect::<Vec<_>>()),
    );
    let members: Vec<usize> = rules
        .rules
        .iter()
        .map(|r| m.push(Component::bitmap(&r.label, labels.iter().map(|l| *l == r.label).collect())))
        .collect();
    m.family("assessment", members, true);
    m.push(Component::label("Assessment", labels));
    Ok(m)
}
