use super::ast::{By, Intention, ModelCall, Statement, Verb};
use super::is_keyword;
use crate::models::Param;
use crate::query::CubeQuery;
use crate::selection::{Condition, LevelRef};

fn ident(s: &str) -> String {
    let plain = s.chars().next().is_some_and(|c| c.is_ascii_alphabetic() || c == '_')
        && s.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
        && !is_keyword(s);
    if plain {
        s.to_string()
    } else {
        format!("\"{}\"", s.replace('"', "\"\""))
    }
}

fn string(s: &str) -> String {
    format!("'{}'", s.replace('\'', "''"))
}

fn level(l: &LevelRef) -> String {
    format!("{}.{}", ident(&l.dimension), ident(&l.level))
}

fn list<T>(xs: &[T], f: impl Fn(&T) -> String) -> String {
    xs.iter().map(f).collect::<Vec<_>>().join(", ")
}

fn precedence(c: &Condition) -> u8 {
    match c {
        Condition::Or(..) => 1,
        Condition::And(..) => 2,
        Condition::Not(_) => 3,
        _ => 4,
    }
}

fn wrap(c: &Condition, parens: bool) -> String {
    if parens {
        format!("({})", render_condition(c))
    } else {
        render_condition(c)
    }
}

/// Minimal parentheses: `and` binds tighter than `or`, both associate left.
pub fn render_condition(c: &Condition) -> String {
    let p = precedence(c);
    match c {
        Condition::True => "true".into(),
        Condition::False => "false".into(),
        Condition::Atom(a) => format!("{} {} {}", level(&a.level), a.op.symbol(), string(&a.value)),
        Condition::And(l, r) | Condition::Or(l, r) => {
            let kw = if p == 1 { "or" } else { "and" };
            format!("{} {kw} {}", wrap(l, precedence(l) < p), wrap(r, precedence(r) <= p))
        }
        Condition::Not(x) => format!("not {}", wrap(x, precedence(x) < 3)),
    }
}

fn param(p: &Param) -> String {
    match p {
        Param::Num(v) => v.to_string(),
        Param::Str(s) => string(s),
    }
}

fn model_call(m: &ModelCall) -> String {
    let mut parts: Vec<String> = m
        .args
        .iter()
        .map(|a| a.split('.').map(ident).collect::<Vec<_>>().join("."))
        .collect();
    parts.extend(m.params.iter().map(|(k, v)| format!("{} = {}", ident(k), param(v))));
    format!("{}({})", ident(&m.name), parts.join(", "))
}

fn filter(f: &Option<Condition>) -> String {
    f.as_ref().map(|c| format!(" for {}", render_condition(c))).unwrap_or_default()
}

pub fn render_intention(i: &Intention) -> String {
    let head = format!("with {} {}", ident(&i.cube), i.verb.name());
    match &i.verb {
        Verb::Describe { measures, filter: f, by } => {
            let by = match by {
                None => String::new(),
                Some(By::Size(n)) => format!(" by size {n}"),
                Some(By::Levels(ls)) => format!(" by {}", list(ls, level)),
            };
            format!("{head} {}{}{by}", list(measures, |m| ident(m)), filter(f))
        }
        Verb::Assess { measures, filter: f, benchmarks } => format!(
            "{head} {}{} using {}",
            list(measures, |m| ident(m)),
            filter(f),
            list(benchmarks, |b| ident(b))
        ),
        Verb::Explain { measure, filter: f, models, against } => {
            let against = against.as_ref().map(|a| format!(" against {}", ident(a))).unwrap_or_default();
            format!("{head} {}{} using {}{against}", ident(measure), filter(f), list(models, model_call))
        }
        Verb::Predict { k, measure, filter: f, over, model } => format!(
            "{head} next {k} points of {}{} over {} using {}",
            ident(measure),
            filter(f),
            ident(over),
            ident(model)
        ),
        Verb::Suggest { model } => match model {
            Some(m) => format!("{head} using {}", ident(m)),
            None => head,
        },
    }
}

pub fn render_cube_query(q: &CubeQuery) -> String {
    let mut s = format!("cube {}", ident(&q.base));
    if q.selection != Condition::True {
        s.push_str(&format!(" where {}", render_condition(&q.selection)));
    }
    if !q.group.is_empty() {
        s.push_str(&format!(" group by {}", list(&q.group, level)));
    }
    s.push_str(&format!(
        " agg {}",
        list(&q.aggregates, |a| format!("{}({})", a.func.name(), ident(&a.measure)))
    ));
    s
}

pub fn render_statement(s: &Statement) -> String {
    match s {
        Statement::Intention(i) => render_intention(i),
        Statement::Query(q) => render_cube_query(q),
    }
}
