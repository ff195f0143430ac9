// SPDX-License-Identifier: Apache-2.0

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::countries::CountryCodes;
use super::tables::{column_of, read_table};
use super::IngestError;
use crate::graph::HarmScore;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndicatorSpec {
    pub name: String,
    pub higher_is_better: bool,
}

impl IndicatorSpec {
    pub fn new(name: impl Into<String>, higher_is_better: bool) -> Self {
        IndicatorSpec {
            name: name.into(),
            higher_is_better,
        }
    }
}

/// Entity × indicator values. Absent cells are missing data.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct IndicatorTable {
    rows: BTreeMap<String, BTreeMap<String, f64>>,
}

impl IndicatorTable {
    pub fn new() -> Self {
        Self::default()
    }

    /// Sets one cell. Returns the previous value, if any.
    pub fn insert(&mut self, entity: &str, indicator: &str, value: f64) -> Option<f64> {
        self.rows
            .entry(entity.to_string())
            .or_default()
            .insert(indicator.to_string(), value)
    }

    pub fn entities(&self) -> impl Iterator<Item = &str> {
        self.rows.keys().map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn row(&self, entity: &str) -> Option<&BTreeMap<String, f64>> {
        self.rows.get(entity)
    }

    pub fn get(&self, entity: &str, indicator: &str) -> Option<f64> {
        self.rows.get(entity)?.get(indicator).copied()
    }

    /// All present values of one indicator.
    pub fn column(&self, indicator: &str) -> BTreeMap<String, f64> {
        self.rows
            .iter()
            .filter_map(|(e, r)| r.get(indicator).map(|&v| (e.clone(), v)))
            .collect()
    }

    /// Renames entities to ISO-3 codes. Entities mapped to "drop" disappear.
    /// Two source rows collapsing onto one code may not share an indicator.
    pub fn to_country_codes(&self, codes: &CountryCodes) -> Result<IndicatorTable, IngestError> {
        let resolved = codes.resolve_all(self.entities())?;
        let mut out = IndicatorTable::new();
        for (entity, row) in &self.rows {
            let Some(code) = &resolved[entity] else { continue };
            for (ind, &v) in row {
                if out.insert(code, ind, v).is_some() {
                    return Err(IngestError::EntityCollision {
                        code: code.clone(),
                        indicator: ind.clone(),
                    });
                }
            }
        }
        Ok(out)
    }
}

/// Parses a long-form `entity,indicator,value` table. Blank values are
/// treated as missing.
pub fn read_indicator_table(text: &str, source: &str) -> Result<IndicatorTable, IngestError> {
    let value_col = column_of(text, "value");
    let mut table = IndicatorTable::new();
    for r in read_table(text, source, &["entity", "indicator", "value"], &[])? {
        let [entity, indicator, value]: [String; 3] = r.fields.try_into().expect("three columns");
        if entity.is_empty() || indicator.is_empty() {
            return Err(IngestError::parse(source, r.line, 1, "empty entity or indicator"));
        }
        if value.is_empty() {
            continue;
        }
        let v: f64 = value
            .parse()
            .ok()
            .filter(|v: &f64| v.is_finite())
            .ok_or_else(|| {
                IngestError::parse(source, r.line, value_col, format!("invalid value `{value}`"))
            })?;
        if table.insert(&entity, &indicator, v).is_some() {
            return Err(IngestError::parse(
                source,
                r.line,
                1,
                format!("duplicate value for `{entity}` / `{indicator}`"),
            ));
        }
    }
    Ok(table)
}

fn parse_bool(s: &str) -> Option<bool> {
    match s.to_ascii_lowercase().as_str() {
        "true" | "yes" | "1" | "y" => Some(true),
        "false" | "no" | "0" | "n" => Some(false),
        _ => None,
    }
}

/// Parses an `indicator,higher_is_better` table.
pub fn read_indicator_specs(text: &str, source: &str) -> Result<Vec<IndicatorSpec>, IngestError> {
    let flag_col = column_of(text, "higher_is_better");
    let mut seen = BTreeSet::new();
    read_table(text, source, &["indicator", "higher_is_better"], &[])?
        .into_iter()
        .map(|r| {
            let [name, flag]: [String; 2] = r.fields.try_into().expect("two columns");
            let higher_is_better = parse_bool(&flag).ok_or_else(|| {
                IngestError::parse(source, r.line, flag_col, format!("expected true/false, got `{flag}`"))
            })?;
            if name.is_empty() || !seen.insert(name.clone()) {
                return Err(IngestError::parse(
                    source,
                    r.line,
                    1,
                    format!("empty or duplicate indicator `{name}`"),
                ));
            }
            Ok(IndicatorSpec {
                name,
                higher_is_better,
            })
        })
        .collect()
}

/// Min-max scales one indicator onto `[0, 100]` across the given entities,
/// inverting when higher values are better.
pub fn normalize_indicator(
    values: &BTreeMap<String, f64>,
    spec: &IndicatorSpec,
) -> Result<BTreeMap<String, f64>, IngestError> {
    let (lo, hi) = values
        .values()
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    if hi <= lo {
        return Err(IngestError::DegenerateIndicator(spec.name.clone()));
    }
    Ok(values
        .iter()
        .filter(|(_, v)| v.is_finite())
        .map(|(e, &v)| {
            let x = (100.0 * ((v - lo) / (hi - lo))).clamp(0.0, 100.0);
            (e.clone(), if spec.higher_is_better { 100.0 - x } else { x })
        })
        .collect())
}

fn mean_of_largest(mut xs: Vec<f64>, k: usize) -> f64 {
    xs.sort_by(|a, b| b.total_cmp(a));
    xs[..k].iter().sum::<f64>() / k as f64
}

/// Mean of the `k` worst (largest) normalized harms among `indicators`.
pub fn intrinsic_harm_topk_worst(
    entity: &str,
    row: &BTreeMap<String, f64>,
    indicators: &[IndicatorSpec],
    k: usize,
) -> Result<HarmScore, IngestError> {
    if k == 0 || k > indicators.len() {
        return Err(IngestError::InvalidK {
            k,
            available: indicators.len(),
        });
    }
    let xs = indicators
        .iter()
        .map(|s| {
            row.get(&s.name).copied().ok_or_else(|| IngestError::MissingIndicator {
                entity: entity.to_string(),
                indicator: s.name.clone(),
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(HarmScore::new(mean_of_largest(xs, k).clamp(0.0, 100.0)).expect("clamped"))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IntrinsicOptions {
    pub k: usize,
    /// Keep entities with at least this many indicators present, averaging
    /// their worst `min(k, present)`. `None` keeps complete rows only.
    pub allow_partial: Option<usize>,
}

impl Default for IntrinsicOptions {
    fn default() -> Self {
        IntrinsicOptions {
            k: 3,
            allow_partial: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IntrinsicHarms {
    pub harms: BTreeMap<String, f64>,
    /// Normalized indicator harms per entity, for the kept entities.
    pub normalized: BTreeMap<String, BTreeMap<String, f64>>,
    /// Entities dropped for missing data.
    pub excluded: Vec<String>,
}

/// Normalizes every indicator across all entities that report it, then
/// scores each sufficiently complete entity.
pub fn intrinsic_harms(
    table: &IndicatorTable,
    specs: &[IndicatorSpec],
    opts: IntrinsicOptions,
) -> Result<IntrinsicHarms, IngestError> {
    if opts.k == 0 || opts.k > specs.len() {
        return Err(IngestError::InvalidK {
            k: opts.k,
            available: specs.len(),
        });
    }
    let mut normalized: BTreeMap<String, BTreeMap<String, f64>> = BTreeMap::new();
    for spec in specs {
        for (e, x) in normalize_indicator(&table.column(&spec.name), spec)? {
            normalized.entry(e).or_default().insert(spec.name.clone(), x);
        }
    }
    let need = opts.allow_partial.unwrap_or(specs.len()).clamp(1, specs.len());
    normalized.retain(|_, row| row.len() >= need);
    let harms: BTreeMap<String, f64> = normalized
        .iter()
        .map(|(e, row)| {
            let k = opts.k.min(row.len());
            (e.clone(), mean_of_largest(row.values().copied().collect(), k))
        })
        .collect();
    let excluded = table
        .entities()
        .filter(|e| !harms.contains_key(*e))
        .map(String::from)
        .collect();
    Ok(IntrinsicHarms {
        harms,
        normalized,
        excluded,
    })
}
