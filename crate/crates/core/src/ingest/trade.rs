// SPDX-License-Identifier: Apache-2.0

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::countries::CountryCodes;
use super::tables::{column_of, read_table};
use super::IngestError;
use crate::graph::{HarmGraph, NodeSpec};

pub const DEFAULT_THRESHOLD_USD: f64 = 1e8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TradeFlowRecord {
    pub origin: String,
    pub dest: String,
    pub sector: String,
    pub year: i32,
    pub value_usd: f64,
}

/// Parses an `origin,dest,sector,year,value_usd` table.
pub fn read_trade_flows(text: &str, source: &str) -> Result<Vec<TradeFlowRecord>, IngestError> {
    let year_col = column_of(text, "year");
    let value_col = column_of(text, "value_usd");
    read_table(text, source, &["origin", "dest", "sector", "year", "value_usd"], &[])?
        .into_iter()
        .map(|r| {
            let [origin, dest, sector, year, value]: [String; 5] =
                r.fields.try_into().expect("five columns");
            if origin.is_empty() || dest.is_empty() {
                return Err(IngestError::parse(source, r.line, 1, "empty country"));
            }
            if origin == dest {
                return Err(IngestError::parse(
                    source,
                    r.line,
                    1,
                    format!("origin and destination are both `{origin}`"),
                ));
            }
            let year = year.parse().map_err(|_| {
                IngestError::parse(source, r.line, year_col, format!("invalid year `{year}`"))
            })?;
            let value_usd = value
                .parse()
                .ok()
                .filter(|v: &f64| v.is_finite() && *v >= 0.0)
                .ok_or_else(|| {
                    IngestError::parse(source, r.line, value_col, format!("invalid value `{value}`"))
                })?;
            Ok(TradeFlowRecord {
                origin,
                dest,
                sector,
                year,
                value_usd,
            })
        })
        .collect()
}

/// Rewrites country labels to ISO-3 codes. Records touching a dropped
/// entity, or joining two aliases of one country, are discarded.
pub fn normalize_trade_flows(
    records: &[TradeFlowRecord],
    codes: &CountryCodes,
) -> Result<Vec<TradeFlowRecord>, IngestError> {
    let resolved = codes.resolve_all(
        records
            .iter()
            .flat_map(|r| [r.origin.as_str(), r.dest.as_str()]),
    )?;
    Ok(records
        .iter()
        .filter_map(|r| {
            let o = resolved[&r.origin].clone()?;
            let d = resolved[&r.dest].clone()?;
            (o != d).then(|| TradeFlowRecord {
                origin: o,
                dest: d,
                ..r.clone()
            })
        })
        .collect())
}

/// Sums flows over sectors for `year` and keeps ordered pairs whose total
/// strictly exceeds `threshold_usd`. Every country seen in that year becomes
/// a node (harm 0, ascending label order), edges or not.
pub fn build_trade_network(records: &[TradeFlowRecord], year: i32, threshold_usd: f64) -> HarmGraph {
    let mut totals: BTreeMap<(&str, &str), f64> = BTreeMap::new();
    let mut countries = BTreeSet::new();
    for r in records.iter().filter(|r| r.year == year) {
        countries.insert(r.origin.as_str());
        countries.insert(r.dest.as_str());
        *totals.entry((&r.origin, &r.dest)).or_default() += r.value_usd;
    }
    HarmGraph::build(
        countries.iter().map(|&c| NodeSpec::new(c, 0.0)),
        totals
            .into_iter()
            .filter(|&(_, v)| v > threshold_usd)
            .map(|(pair, _)| pair),
    )
    .expect("distinct countries and no self flows")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PruneMode {
    /// One pass of each rule.
    Once,
    /// Repeat the in-degree and isolation rules until nothing changes.
    #[default]
    Fixpoint,
}

impl PruneMode {
    pub fn as_str(self) -> &'static str {
        match self {
            PruneMode::Once => "once",
            PruneMode::Fixpoint => "fixpoint",
        }
    }
}

impl fmt::Display for PruneMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PruneMode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "once" | "single" => Ok(PruneMode::Once),
            "fixpoint" | "fix" => Ok(PruneMode::Fixpoint),
            other => Err(format!("unknown prune mode `{other}` (expected once or fixpoint)")),
        }
    }
}

/// Drops nodes without a valid harm, then nodes with no incoming edges,
/// then isolated nodes. Surviving nodes take their harm from `harms`.
pub fn prune_trade_network(g: &HarmGraph, harms: &BTreeMap<String, f64>, mode: PruneMode) -> HarmGraph {
    let n = g.node_count();
    let valid = |v| {
        harms
            .get(g.label(v))
            .is_some_and(|h| h.is_finite() && (0.0..=100.0).contains(h))
    };
    let mut alive: Vec<bool> = g.nodes().map(valid).collect();
    let mut indeg = vec![0usize; n];
    let mut outdeg = vec![0usize; n];
    for (s, d) in g.edges() {
        if alive[s.index()] && alive[d.index()] {
            indeg[d.index()] += 1;
            outdeg[s.index()] += 1;
        }
    }
    let kill = |v: usize, alive: &mut Vec<bool>, indeg: &mut Vec<usize>, outdeg: &mut Vec<usize>, touched: &mut Vec<usize>| {
        alive[v] = false;
        let id = crate::graph::NodeId::from(v);
        for &w in g.out_neighbors(id).expect("in range") {
            if alive[w.index()] {
                indeg[w.index()] -= 1;
                touched.push(w.index());
            }
        }
        for &w in g.in_neighbors(id).expect("in range") {
            if alive[w.index()] {
                outdeg[w.index()] -= 1;
                touched.push(w.index());
            }
        }
    };
    let mut scratch = Vec::new();
    match mode {
        PruneMode::Once => {
            let sources: Vec<usize> = (0..n).filter(|&v| alive[v] && indeg[v] == 0).collect();
            for v in sources {
                kill(v, &mut alive, &mut indeg, &mut outdeg, &mut scratch);
            }
            let isolated: Vec<usize> =
                (0..n).filter(|&v| alive[v] && indeg[v] == 0 && outdeg[v] == 0).collect();
            for v in isolated {
                kill(v, &mut alive, &mut indeg, &mut outdeg, &mut scratch);
            }
        }
        PruneMode::Fixpoint => {
            // A node with no incoming edges is removed whether or not it is
            // isolated, so the fixpoint is reached when every survivor has
            // positive in-degree.
            let mut queue: VecDeque<usize> = (0..n).filter(|&v| alive[v] && indeg[v] == 0).collect();
            while let Some(v) = queue.pop_front() {
                if !alive[v] {
                    continue;
                }
                scratch.clear();
                kill(v, &mut alive, &mut indeg, &mut outdeg, &mut scratch);
                queue.extend(scratch.iter().filter(|&&w| alive[w] && indeg[w] == 0));
            }
        }
    }
    let kept = g.induced(&alive);
    let overrides: Vec<_> = kept.nodes().map(|v| (v, harms[kept.label(v)])).collect();
    kept.with_harms(overrides).expect("harms validated")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(o: &str, d: &str, sector: &str, v: f64) -> TradeFlowRecord {
        TradeFlowRecord {
            origin: o.into(),
            dest: d.into(),
            sector: sector.into(),
            year: 2020,
            value_usd: v,
        }
    }

    fn all_valid(g: &HarmGraph) -> BTreeMap<String, f64> {
        g.nodes().map(|v| (g.label(v).to_string(), 10.0)).collect()
    }

    #[test]
    fn sector_sum_exceeds_threshold() {
        let g = build_trade_network(&[rec("AAA", "BBB", "s1", 6e7), rec("AAA", "BBB", "s2", 5e7)], 2020, 1e8);
        assert_eq!(g.edge_count(), 1);
    }

    #[test]
    fn threshold_is_strict() {
        let g = build_trade_network(&[rec("AAA", "BBB", "s1", 1e8)], 2020, 1e8);
        assert_eq!(g.edge_count(), 0);
        assert_eq!(g.node_count(), 2);
        let other_year = build_trade_network(&[rec("AAA", "BBB", "s1", 5e8)], 2019, 1e8);
        assert!(other_year.is_empty());
    }

    #[test]
    fn chain_prunes_to_nothing() {
        let g = HarmGraph::build([("a", 0.0), ("b", 0.0), ("c", 0.0)], [("a", "b"), ("b", "c")]).unwrap();
        let out = prune_trade_network(&g, &all_valid(&g), PruneMode::Fixpoint);
        assert!(out.is_empty());
        let once = prune_trade_network(&g, &all_valid(&g), PruneMode::Once);
        assert_eq!(once.node_count(), 2);
    }

    #[test]
    fn cycle_survives_and_takes_harms() {
        let g = HarmGraph::build([("a", 0.0), ("b", 0.0), ("c", 0.0), ("x", 0.0)], [("a", "b"), ("b", "c"), ("c", "a"), ("x", "a")]).unwrap();
        let mut harms = all_valid(&g);
        harms.insert("b".into(), 42.0);
        let out = prune_trade_network(&g, &harms, PruneMode::Fixpoint);
        assert_eq!(out.node_count(), 3);
        assert_eq!(out.harm(out.node("b").unwrap()), 42.0);
        assert_eq!(prune_trade_network(&out, &harms, PruneMode::Fixpoint), out);
    }

    #[test]
    fn missing_harm_removed_first() {
        let g = HarmGraph::build([("a", 0.0), ("b", 0.0)], [("a", "b"), ("b", "a")]).unwrap();
        let harms = BTreeMap::from([("a".to_string(), 5.0)]);
        assert!(prune_trade_network(&g, &harms, PruneMode::Fixpoint).is_empty());
    }

    #[test]
    fn parse_and_normalize() {
        let text = "origin,dest,sector,year,value_usd\nUSA,fra,food,2020,1.5e8\nWorld,USA,food,2020,9\n";
        let recs = read_trade_flows(text, "t").unwrap();
        assert_eq!(recs.len(), 2);
        let codes = CountryCodes::with_aliases([("world".to_string(), "-".to_string())].into()).unwrap();
        let norm = normalize_trade_flows(&recs, &codes).unwrap();
        assert_eq!(norm, vec![rec("USA", "FRA", "food", 1.5e8)]);
        assert!(normalize_trade_flows(&recs, &CountryCodes::new()).is_err());
        let err = read_trade_flows("origin,dest,sector,year,value_usd\nUSA,FRA,x,2020,-1\n", "t").unwrap_err();
        assert!(matches!(err, IngestError::Parse { line: 2, column: 5, .. }));
    }

    #[test]
    fn prune_mode_parse() {
        assert_eq!("once".parse::<PruneMode>().unwrap(), PruneMode::Once);
        assert_eq!("FIXPOINT".parse::<PruneMode>().unwrap(), PruneMode::Fixpoint);
        assert!("twice".parse::<PruneMode>().is_err());
    }
}
