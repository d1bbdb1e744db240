use crate::models::Param;
use crate::query::CubeQuery;
use crate::selection::{Condition, LevelRef};

#[derive(Debug, Clone, PartialEq)]
pub enum Statement {
    Intention(Intention),
    Query(CubeQuery),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Intention {
    pub cube: String,
    pub verb: Verb,
}

#[derive(Debug, Clone, PartialEq)]
pub enum By {
    Levels(Vec<LevelRef>),
    Size(u32),
}

/// `name(arg, ..., key = value, ...)`. Arguments are dotted attribute paths.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelCall {
    pub name: String,
    pub args: Vec<String>,
    pub params: Vec<(String, Param)>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Verb {
    Describe {
        measures: Vec<String>,
        filter: Option<Condition>,
        by: Option<By>,
    },
    Assess {
        measures: Vec<String>,
        filter: Option<Condition>,
        benchmarks: Vec<String>,
    },
    Explain {
        measure: String,
        filter: Option<Condition>,
        models: Vec<ModelCall>,
        against: Option<String>,
    },
    Predict {
        k: u32,
        measure: String,
        filter: Option<Condition>,
        over: String,
        model: String,
    },
    Suggest {
        model: Option<String>,
    },
}

impl Verb {
    pub fn name(&self) -> &'static str {
        match self {
            Verb::Describe { .. } => "describe",
            Verb::Assess { .. } => "assess",
            Verb::Explain { .. } => "explain",
            Verb::Predict { .. } => "predict",
            Verb::Suggest { .. } => "suggest",
        }
    }

    pub fn filter(&self) -> Option<&Condition> {
        match self {
            Verb::Describe { filter, .. }
            | Verb::Assess { filter, .. }
            | Verb::Explain { filter, .. }
            | Verb::Predict { filter, .. } => filter.as_ref(),
            Verb::Suggest { .. } => None,
        }
    }
}
