// SPDX-License-Identifier: Apache-2.0

use std::collections::{BTreeMap, BTreeSet, HashMap};

use super::IngestError;

/// ISO 3166-1 alpha-3 codes, plus the user-assigned XKX (Kosovo).
const ISO3: &[&str] = &[
    "ABW", "AFG", "AGO", "AIA", "ALA", "ALB", "AND", "ARE", "ARG", "ARM", "ASM", "ATA", "ATF",
    "ATG", "AUS", "AUT", "AZE", "BDI", "BEL", "BEN", "BES", "BFA", "BGD", "BGR", "BHR", "BHS",
    "BIH", "BLM", "BLR", "BLZ", "BMU", "BOL", "BRA", "BRB", "BRN", "BTN", "BVT", "BWA", "CAF",
    "CAN", "CCK", "CHE", "CHL", "CHN", "CIV", "CMR", "COD", "COG", "COK", "COL", "COM", "CPV",
    "CRI", "CUB", "CUW", "CXR", "CYM", "CYP", "CZE", "DEU", "DJI", "DMA", "DNK", "DOM", "DZA",
    "ECU", "EGY", "ERI", "ESH", "ESP", "EST", "ETH", "FIN", "FJI", "FLK", "FRA", "FRO", "FSM",
    "GAB", "GBR", "GEO", "GGY", "GHA", "GIB", "GIN", "GLP", "GMB", "GNB", "GNQ", "GRC", "GRD",
    "GRL", "GTM", "GUF", "GUM", "GUY", "HKG", "HMD", "HND", "HRV", "HTI", "HUN", "IDN", "IMN",
    "IND", "IOT", "IRL", "IRN", "IRQ", "ISL", "ISR", "ITA", "JAM", "JEY", "JOR", "JPN", "KAZ",
    "KEN", "KGZ", "KHM", "KIR", "KNA", "KOR", "KWT", "LAO", "LBN", "LBR", "LBY", "LCA", "LIE",
    "LKA", "LSO", "LTU", "LUX", "LVA", "MAC", "MAF", "MAR", "MCO", "MDA", "MDG", "MDV", "MEX",
    "MHL", "MKD", "MLI", "MLT", "MMR", "MNE", "MNG", "MNP", "MOZ", "MRT", "MSR", "MTQ", "MUS",
    "MWI", "MYS", "MYT", "NAM", "NCL", "NER", "NFK", "NGA", "NIC", "NIU", "NLD", "NOR", "NPL",
    "NRU", "NZL", "OMN", "PAK", "PAN", "PCN", "PER", "PHL", "PLW", "PNG", "POL", "PRI", "PRK",
    "PRT", "PRY", "PSE", "PYF", "QAT", "REU", "ROU", "RUS", "RWA", "SAU", "SDN", "SEN", "SGP",
    "SGS", "SHN", "SJM", "SLB", "SLE", "SLV", "SMR", "SOM", "SPM", "SRB", "SSD", "STP", "SUR",
    "SVK", "SVN", "SWE", "SWZ", "SXM", "SYC", "SYR", "TCA", "TCD", "TGO", "THA", "TJK", "TKL",
    "TKM", "TLS", "TON", "TTO", "TUN", "TUR", "TUV", "TWN", "TZA", "UGA", "UKR", "UMI", "URY",
    "USA", "UZB", "VAT", "VCT", "VEN", "VGB", "VIR", "VNM", "VUT", "WLF", "WSM", "XKX", "YEM",
    "ZAF", "ZMB", "ZWE",
];

/// Alias target that discards an entity (regional aggregates and the like).
pub const DROP: &str = "-";

/// Resolves free-form country labels to ISO-3 codes: a label that already
/// is a code (any case) maps to itself, anything else needs an alias.
#[derive(Debug, Clone, Default)]
pub struct CountryCodes {
    aliases: HashMap<String, String>,
}

impl CountryCodes {
    pub fn new() -> Self {
        Self::default()
    }

    /// Alias targets must be ISO-3 codes or `-` (drop).
    pub fn with_aliases(aliases: HashMap<String, String>) -> Result<Self, IngestError> {
        let mut bad: BTreeSet<String> = BTreeSet::new();
        let mut out = HashMap::with_capacity(aliases.len());
        for (alias, target) in aliases {
            let target = target.trim().to_ascii_uppercase();
            if target != DROP && !Self::is_code(&target) {
                bad.insert(format!("{alias} -> {target}"));
            }
            out.insert(alias.trim().to_lowercase(), target);
        }
        if !bad.is_empty() {
            return Err(IngestError::UnmappedCountries(bad.into_iter().collect()));
        }
        Ok(CountryCodes { aliases: out })
    }

    pub fn is_code(s: &str) -> bool {
        ISO3.binary_search(&s).is_ok()
    }

    /// `Some(Some(code))` when resolved, `Some(None)` when dropped, `None`
    /// when unknown.
    pub fn resolve(&self, label: &str) -> Option<Option<String>> {
        let key = label.trim();
        if let Some(t) = self.aliases.get(&key.to_lowercase()) {
            return Some((t != DROP).then(|| t.clone()));
        }
        let upper = key.to_ascii_uppercase();
        Self::is_code(&upper).then_some(Some(upper))
    }

    /// Resolves every label, reporting all unknown ones at once.
    pub fn resolve_all<'a>(
        &self,
        labels: impl IntoIterator<Item = &'a str>,
    ) -> Result<BTreeMap<String, Option<String>>, IngestError> {
        let mut out = BTreeMap::new();
        let mut unknown = BTreeSet::new();
        for l in labels {
            match self.resolve(l) {
                Some(r) => {
                    out.insert(l.to_string(), r);
                }
                None => {
                    unknown.insert(l.to_string());
                }
            }
        }
        if unknown.is_empty() {
            Ok(out)
        } else {
            Err(IngestError::UnmappedCountries(unknown.into_iter().collect()))
        }
    }
}
