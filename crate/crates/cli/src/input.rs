//! Reading chain, measure and flow files, and parsing event constraints.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use anyhow::{anyhow, bail, Context};
use ctmc_ldp::{Chain, Event, Flow, HalfSpace, Measure};
use serde::Deserialize;

use crate::Failure;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ChainFile {
    states: Vec<String>,
    edges: Vec<EdgeEntry>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct EdgeEntry {
    from: String,
    to: String,
    rate: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct FlowEntry {
    from: String,
    to: String,
    value: f64,
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, Failure> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("cannot read {}", path.display()))
        .map_err(Failure::Input)?;
    serde_json::from_str(&text)
        .with_context(|| format!("malformed JSON in {}", path.display()))
        .map_err(Failure::Input)
}

pub fn load_chain(path: &Path) -> Result<Chain, Failure> {
    let file: ChainFile = read_json(path)?;
    let edges: Vec<(&str, &str, f64)> = file
        .edges
        .iter()
        .map(|e| (e.from.as_str(), e.to.as_str(), e.rate))
        .collect();
    Ok(Chain::new(&file.states, &edges)?)
}

/// Sparse `{"state": weight}`; states left out get weight 0.
pub fn load_measure(chain: &Chain, path: &Path) -> Result<Measure, Failure> {
    let entries: BTreeMap<String, f64> = read_json(path)?;
    let mut weights = vec![0.0; chain.n_states()];
    for (name, w) in entries {
        weights[chain.state_index(&name)?] = w;
    }
    Ok(Measure::new(weights)?)
}

/// Sparse `[{"from", "to", "value"}]`; edges left out carry 0.
pub fn load_flow(chain: &Chain, path: &Path) -> Result<Flow, Failure> {
    let entries: Vec<FlowEntry> = read_json(path)?;
    let mut values = vec![0.0; chain.n_edges()];
    for e in entries {
        let (y, z) = (chain.state_index(&e.from)?, chain.state_index(&e.to)?);
        let id = chain.edge_id(y, z).ok_or_else(|| {
            ctmc_ldp::Error::InvalidFlow(format!("({}, {}) is not an edge of the chain", e.from, e.to))
        })?;
        values[id] = e.value;
    }
    Ok(Flow::new(values)?)
}

/// Parses `name>=θ` or `name:c,name:c>=θ` into a half-space Σ c_x μ(x) ≥ θ.
pub fn parse_constraint(chain: &Chain, text: &str) -> Result<HalfSpace, Failure> {
    let parse = || -> anyhow::Result<(Vec<(String, f64)>, f64)> {
        let (lhs, rhs) = text
            .split_once(">=")
            .ok_or_else(|| anyhow!("constraint `{text}` must have the form lhs>=threshold"))?;
        let threshold: f64 = rhs.trim().parse().with_context(|| format!("bad threshold in `{text}`"))?;
        let mut terms = Vec::new();
        for term in lhs.split(',') {
            let term = term.trim();
            if term.is_empty() {
                bail!("empty term in `{text}`");
            }
            match term.split_once(':') {
                Some((name, c)) => {
                    let c: f64 = c.trim().parse().with_context(|| format!("bad coefficient in `{term}`"))?;
                    terms.push((name.trim().to_string(), c));
                }
                None => terms.push((term.to_string(), 1.0)),
            }
        }
        Ok((terms, threshold))
    };
    let (terms, threshold) = parse().map_err(Failure::Input)?;
    let mut coefficients = vec![0.0; chain.n_states()];
    for (name, c) in terms {
        coefficients[chain.state_index(&name)?] += c;
    }
    Ok(HalfSpace {
        coefficients,
        threshold,
    })
}

pub fn parse_event(chain: &Chain, constraints: &[String]) -> Result<Event, Failure> {
    Ok(Event {
        constraints: constraints
            .iter()
            .map(|c| parse_constraint(chain, c))
            .collect::<Result<_, _>>()?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chain() -> Chain {
        Chain::new(&["a", "b", "c"], &[("a", "b", 1.0), ("b", "c", 1.0), ("c", "a", 1.0)]).unwrap()
    }

    #[test]
    fn constraints() {
        let c = chain();
        let h = parse_constraint(&c, "b>=0.6").unwrap();
        assert_eq!(h.coefficients, vec![0.0, 1.0, 0.0]);
        assert_eq!(h.threshold, 0.6);
        let h = parse_constraint(&c, "a:1, c:-2 >= -0.5").unwrap();
        assert_eq!(h.coefficients, vec![1.0, 0.0, -2.0]);
        assert_eq!(h.threshold, -0.5);
        assert!(matches!(parse_constraint(&c, "a>0.5"), Err(Failure::Input(_))));
        assert!(matches!(parse_constraint(&c, "a:x>=0.5"), Err(Failure::Input(_))));
        assert!(matches!(parse_constraint(&c, "z>=0.5"), Err(Failure::Domain(_))));
    }
}
