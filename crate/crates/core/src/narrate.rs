//! Template "why" / "why not" explanations built from success probabilities.
//!
//! Every percentage that appears in a rendered sentence is also listed in
//! [`Explanation::cited`], rounded the same way (two decimals). Q-values
//! never appear in the text.

use serde::{Deserialize, Serialize};

use crate::env::EnvKind;
use crate::error::{CoreError, Result};
use crate::explainers::{Method, SuccessEstimate};
use crate::learner::argmax;
use crate::mdp::ActionId;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QueryKind {
    Why,
    WhyNot,
    Compare,
}

impl QueryKind {
    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "why" => Ok(QueryKind::Why),
            "why_not" | "why-not" => Ok(QueryKind::WhyNot),
            "compare" => Ok(QueryKind::Compare),
            other => Err(CoreError::UnknownName(other.to_string())),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExplanationQuery {
    pub kind: QueryKind,
    pub state: usize,
    /// Required for `why` and `why_not`, absent for `compare`.
    pub action: Option<ActionId>,
    pub methods: Vec<Method>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Citation {
    pub method: Method,
    pub action: ActionId,
    pub probability: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Explanation {
    pub query: ExplanationQuery,
    pub text: String,
    pub cited: Vec<Citation>,
    pub chosen_action: ActionId,
    /// Whether the queried action is the argmax under each method.
    pub preferred: Vec<(Method, bool)>,
}

/// Renders a probability as a percentage with two decimals.
pub fn percent(p: f64) -> String {
    format!("{:.2}%", p * 100.0)
}

fn method_tag(method: Method) -> &'static str {
    match method {
        Method::Memory => "observed, memory-based",
        Method::Learning => "estimated, learning-based",
        Method::Introspection => "estimated, introspection-based",
    }
}

fn enumerate(items: &[String]) -> String {
    const NUMERALS: [&str; 3] = ["i", "ii", "iii"];
    match items.len() {
        0 => String::new(),
        1 => items[0].clone(),
        n => items
            .iter()
            .enumerate()
            .map(|(k, item)| {
                let glue = if k + 1 == n { "or " } else { "" };
                format!("{glue}({}) {item}", NUMERALS.get(k).copied().unwrap_or("..."))
            })
            .collect::<Vec<_>>()
            .join(", "),
    }
}

fn join_and(items: &[String]) -> String {
    match items {
        [] => String::new(),
        [one] => one.clone(),
        [init @ .., last] => format!("{}, and {last}", init.join(", ")),
    }
}

/// Builds explanations for one environment from a set of estimates.
pub struct Narrator<'a> {
    env: EnvKind,
    estimates: &'a [SuccessEstimate],
}

struct Row<'a> {
    method: Method,
    probs: &'a [f64],
    best: usize,
}

impl<'a> Narrator<'a> {
    pub fn new(env: EnvKind, estimates: &'a [SuccessEstimate]) -> Self {
        Narrator { env, estimates }
    }

    fn rows(&self, state: usize, methods: &[Method]) -> Result<Vec<Row<'a>>> {
        if methods.is_empty() {
            return Err(CoreError::EmptyInput);
        }
        self.env.state_label(state)?;
        methods
            .iter()
            .map(|&m| {
                let est = self
                    .estimates
                    .iter()
                    .find(|e| e.method == m)
                    .ok_or_else(|| CoreError::UnknownName(m.name().to_string()))?;
                let probs = est.row(state)?;
                if probs.len() != self.env.action_count() {
                    return Err(CoreError::LengthMismatch { left: probs.len(), right: self.env.action_count() });
                }
                Ok(Row { method: m, probs, best: argmax(probs) })
            })
            .collect()
    }

    fn phrase(&self, action: usize) -> &'static str {
        self.env.action_phrase(ActionId(action)).expect("action index checked")
    }

    fn check_action(&self, action: ActionId) -> Result<usize> {
        self.env.action_phrase(action)?;
        Ok(action.0)
    }

    pub fn explain(&self, query: &ExplanationQuery) -> Result<Explanation> {
        match (query.kind, query.action) {
            (QueryKind::Why, Some(a)) => self.explain_why(query.state, a, &query.methods),
            (QueryKind::WhyNot, Some(a)) => self.explain_why_not(query.state, a, &query.methods),
            (QueryKind::Compare, None) => self.explain_compare(query.state, &query.methods),
            (QueryKind::Compare, Some(_)) => {
                Err(CoreError::InvalidConfig { field: "action", reason: "compare takes no action".into() })
            }
            (_, None) => Err(CoreError::InvalidConfig { field: "action", reason: "an action is required".into() }),
        }
    }

    /// "In state s, I chose a because it has a probability of success of p."
    pub fn explain_why(&self, state: usize, action: ActionId, methods: &[Method]) -> Result<Explanation> {
        let a = self.check_action(action)?;
        let rows = self.rows(state, methods)?;
        let mut cited = Vec::new();
        let mut items = Vec::new();
        let mut caveats = Vec::new();
        let mut caveat_cited = Vec::new();
        for row in &rows {
            let p = row.probs[a];
            cited.push(Citation { method: row.method, action, probability: p });
            items.push(format!("{} ({})", percent(p), method_tag(row.method)));
            if row.probs[row.best] > p {
                let best = row.probs[row.best];
                caveat_cited.push(Citation { method: row.method, action: ActionId(row.best), probability: best });
                caveats.push(format!(
                    " Under the {}-based estimate, choosing to {} scores higher ({}).",
                    row.method.name(),
                    self.phrase(row.best),
                    percent(best)
                ));
            }
        }
        let mut text = format!(
            "In state {}, I chose to {} because it has a probability of success of{} {}.",
            self.env.state_label(state)?,
            self.phrase(a),
            if rows.len() > 1 { ":" } else { "" },
            enumerate(&items)
        );
        text.extend(caveats);
        cited.extend(caveat_cited);
        Ok(Explanation {
            query: ExplanationQuery { kind: QueryKind::Why, state, action: Some(action), methods: methods.to_vec() },
            text,
            cited,
            chosen_action: action,
            preferred: rows.iter().map(|r| (r.method, r.best == a)).collect(),
        })
    }

    /// "In state s, I did not choose a because it has only a probability of
    /// success of p compared to q for b."
    pub fn explain_why_not(&self, state: usize, action: ActionId, methods: &[Method]) -> Result<Explanation> {
        let a = self.check_action(action)?;
        let rows = self.rows(state, methods)?;
        let mut cited = Vec::new();
        let mut items = Vec::new();
        for row in &rows {
            let p = row.probs[a];
            cited.push(Citation { method: row.method, action, probability: p });
            if row.best == a {
                items.push(format!(
                    "{} ({}), although it is in fact the preferred action under that estimate",
                    percent(p),
                    method_tag(row.method)
                ));
            } else {
                let best = row.probs[row.best];
                cited.push(Citation { method: row.method, action: ActionId(row.best), probability: best });
                items.push(format!(
                    "{} ({}) compared to {} to {}",
                    percent(p),
                    method_tag(row.method),
                    percent(best),
                    self.phrase(row.best)
                ));
            }
        }
        let text = format!(
            "In state {}, I did not choose to {} because it has only a probability of success of{} {}.",
            self.env.state_label(state)?,
            self.phrase(a),
            if rows.len() > 1 { ":" } else { "" },
            enumerate(&items)
        );
        Ok(Explanation {
            query: ExplanationQuery { kind: QueryKind::WhyNot, state, action: Some(action), methods: methods.to_vec() },
            text,
            cited,
            chosen_action: ActionId(rows[0].best),
            preferred: rows.iter().map(|r| (r.method, r.best == a)).collect(),
        })
    }

    /// Lists every action's probability and names the most successful one,
    /// judged by the first requested method.
    pub fn explain_compare(&self, state: usize, methods: &[Method]) -> Result<Explanation> {
        let rows = self.rows(state, methods)?;
        let label = self.env.state_label(state)?;
        let mut cited = Vec::new();
        let mut sentences = Vec::new();
        for row in &rows {
            let listed: Vec<String> = row
                .probs
                .iter()
                .enumerate()
                .map(|(k, &p)| {
                    cited.push(Citation { method: row.method, action: ActionId(k), probability: p });
                    format!("{} to {}", percent(p), self.phrase(k))
                })
                .collect();
            sentences.push(format!(
                "In state {label}, the probabilities of success are {} ({}).",
                join_and(&listed),
                method_tag(row.method)
            ));
        }
        let lead = &rows[0];
        let chosen = lead.best;
        let tied: Vec<usize> = (0..lead.probs.len())
            .filter(|&k| k != chosen && lead.probs[k] == lead.probs[chosen])
            .collect();
        let mut closing = format!(
            "I chose to {} because it had the biggest probability of successfully finishing the task",
            self.phrase(chosen)
        );
        if !tied.is_empty() {
            let others: Vec<String> = tied.iter().map(|&k| format!("to {}", self.phrase(k))).collect();
            closing.push_str(&format!(
                " (tied with choosing {}; ties go to the first listed action)",
                join_and(&others)
            ));
        }
        closing.push('.');
        sentences.push(closing);
        Ok(Explanation {
            query: ExplanationQuery { kind: QueryKind::Compare, state, action: None, methods: methods.to_vec() },
            text: sentences.join(" "),
            cited,
            chosen_action: ActionId(chosen),
            preferred: rows.iter().map(|r| (r.method, r.best == chosen)).collect(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use regex::Regex;

    fn nav_estimates(rows: &[(Method, [f64; 3])], state: usize) -> Vec<SuccessEstimate> {
        rows.iter()
            .map(|(m, probs)| {
                let mut values = vec![0.0; 18];
                values[state * 3..state * 3 + 3].copy_from_slice(probs);
                SuccessEstimate::new(*m, 6, 3, values).unwrap()
            })
            .collect()
    }

    fn percentages(text: &str) -> Vec<String> {
        Regex::new(r"(\d+\.\d{2})%").unwrap().captures_iter(text).map(|c| c[1].to_string()).collect()
    }

    fn assert_cited(e: &Explanation) {
        let cited: Vec<String> = e.cited.iter().map(|c| format!("{:.2}", c.probability * 100.0)).collect();
        for p in percentages(&e.text) {
            assert!(cited.contains(&p), "{p} not cited in {:?}", e.text);
        }
    }

    #[test]
    fn why_cites_each_requested_method() {
        let est = nav_estimates(
            &[
                (Method::Memory, [0.0476, 0.8691, 0.30]),
                (Method::Learning, [0.146, 0.9375, 0.40]),
                (Method::Introspection, [0.2267, 0.8593, 0.35]),
            ],
            1,
        );
        let n = Narrator::new(EnvKind::Navigation, &est);
        let e = n.explain_why(1, ActionId(1), &Method::ALL).unwrap();
        assert!(e.text.starts_with("In state s1, I chose to move to the right because"));
        assert_eq!(percentages(&e.text), ["86.91", "93.75", "85.93"]);
        assert!(e.text.contains("(i) 86.91% (observed, memory-based)"));
        assert!(e.preferred.iter().all(|(_, p)| *p));
        assert_cited(&e);

        let e = n.explain_why_not(1, ActionId(0), &Method::ALL).unwrap();
        assert_eq!(percentages(&e.text), ["4.76", "86.91", "14.60", "93.75", "22.67", "85.93"]);
        assert!(e.text.contains("did not choose to move to the left"));
        assert_eq!(e.chosen_action, ActionId(1));
        assert_cited(&e);
    }

    #[test]
    fn zero_estimates_and_single_method() {
        let est = nav_estimates(&[(Method::Memory, [0.0; 3]), (Method::Learning, [0.0; 3])], 0);
        let n = Narrator::new(EnvKind::Navigation, &est);
        let e = n.explain_why(0, ActionId(2), &[Method::Memory, Method::Learning]).unwrap();
        assert_eq!(percentages(&e.text), ["0.00", "0.00"]);
        let e = n.explain_why(0, ActionId(2), &[Method::Learning]).unwrap();
        assert_eq!(percentages(&e.text).len(), 1);
    }

    #[test]
    fn why_not_on_preferred_action_says_so() {
        let est = nav_estimates(&[(Method::Memory, [0.2, 0.9, 0.5])], 0);
        let e = Narrator::new(EnvKind::Navigation, &est).explain_why_not(0, ActionId(1), &[Method::Memory]).unwrap();
        assert!(e.text.contains("preferred action"));
        assert_eq!(e.preferred, vec![(Method::Memory, true)]);
    }

    #[test]
    fn why_not_is_comparative() {
        let est = nav_estimates(&[(Method::Memory, [0.38, 0.85, 0.5])], 0);
        let e = Narrator::new(EnvKind::Navigation, &est).explain_why_not(0, ActionId(0), &[Method::Memory]).unwrap();
        assert!(e.text.contains("38.00% (observed, memory-based) compared to 85.00% to move to the right"), "{}", e.text);
    }

    #[test]
    fn compare_names_argmax() {
        let est = nav_estimates(&[(Method::Memory, [0.4809, 0.7046, 0.6424])], 0);
        let e = Narrator::new(EnvKind::Navigation, &est).explain_compare(0, &[Method::Memory]).unwrap();
        assert_eq!(e.chosen_action, ActionId(1));
        assert_eq!(percentages(&e.text), ["48.09", "70.46", "64.24"]);
        assert!(e.text.contains("I chose to move to the right because it had the biggest probability"));
        assert!(!e.text.contains("tied"));
    }

    #[test]
    fn compare_discloses_ties() {
        let est = nav_estimates(&[(Method::Memory, [0.5, 0.5, 0.5])], 0);
        let e = Narrator::new(EnvKind::Navigation, &est).explain_compare(0, &[Method::Memory]).unwrap();
        assert_eq!(e.chosen_action, ActionId(0));
        assert!(e.text.contains("tied with choosing to move to the right, and to stay in the same room"), "{}", e.text);
    }

    #[test]
    fn unknown_inputs_rejected() {
        let est = nav_estimates(&[(Method::Memory, [0.5, 0.5, 0.5])], 0);
        let n = Narrator::new(EnvKind::Navigation, &est);
        assert!(n.explain_why(7, ActionId(0), &[Method::Memory]).is_err());
        assert!(n.explain_why(0, ActionId(3), &[Method::Memory]).is_err());
        assert!(n.explain_why(0, ActionId(0), &[Method::Learning]).is_err());
        let q = ExplanationQuery { kind: QueryKind::Why, state: 0, action: None, methods: vec![Method::Memory] };
        assert!(n.explain(&q).is_err());
    }

    proptest! {
        #[test]
        fn rendered_percentages_round_trip(
            probs in prop::collection::vec(prop::array::uniform3(0.0f64..=1.0), 1..=3),
            action in 0usize..3,
        ) {
            let rows: Vec<(Method, [f64; 3])> = probs.iter().zip(Method::ALL).map(|(p, m)| (m, *p)).collect();
            let methods: Vec<Method> = rows.iter().map(|r| r.0).collect();
            let est = nav_estimates(&rows, 2);
            let n = Narrator::new(EnvKind::Navigation, &est);
            for e in [
                n.explain_why(2, ActionId(action), &methods).unwrap(),
                n.explain_why_not(2, ActionId(action), &methods).unwrap(),
                n.explain_compare(2, &methods).unwrap(),
            ] {
                let rendered = percentages(&e.text);
                let cited: Vec<String> = e.cited.iter().map(|c| format!("{:.2}", c.probability * 100.0)).collect();
                prop_assert_eq!(rendered.len(), cited.len());
                prop_assert_eq!(&rendered, &cited);
                prop_assert!(!e.text.to_lowercase().contains("q-value"));
            }
            let e = n.explain_compare(2, &methods).unwrap();
            prop_assert_eq!(e.chosen_action.0, argmax(&rows[0].1));
        }
    }
}
