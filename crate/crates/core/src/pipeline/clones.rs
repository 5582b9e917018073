//! Mapping snippets onto deployed contracts and classifying them by time.

use std::collections::{BTreeMap, HashMap};

use chrono::{DateTime, Utc};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::clone::{CloneError, CloneParams, Fingerprint, NgramIndex};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum TemporalClass {
    /// Any match, regardless of dates.
    All,
    /// The contract was deployed strictly after the snippet was posted.
    Disseminator,
    /// As `Disseminator`, and every contract matching the snippet is newer.
    Source,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CloneLink {
    pub snippet_id: String,
    pub contract_id: String,
    pub epsilon: f64,
    pub temporal_class: TemporalClass,
}

/// Per-snippet membership in the three nested classes.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SnippetClass {
    pub all: bool,
    pub disseminator: bool,
    pub source: bool,
}

impl SnippetClass {
    /// `newer` holds, per matching contract, whether it postdates the snippet.
    pub fn of(newer: &[bool]) -> Self {
        let all = !newer.is_empty();
        SnippetClass { all, disseminator: newer.iter().any(|&b| b), source: all && newer.iter().all(|&b| b) }
    }

    pub fn includes(&self, class: TemporalClass) -> bool {
        match class {
            TemporalClass::All => self.all,
            TemporalClass::Disseminator => self.disseminator,
            TemporalClass::Source => self.source,
        }
    }
}

/// A fingerprinted snippet with its posting time.
#[derive(Debug, Clone)]
pub struct DatedFingerprint {
    pub fingerprint: Fingerprint,
    pub at: DateTime<Utc>,
}

/// Links every snippet to the indexed contracts it matches, ordered by
/// snippet id then contract id. `deployed` gives each indexed contract's
/// deployment time.
pub fn map_clones(
    snippets: &[DatedFingerprint],
    index: &NgramIndex,
    deployed: &HashMap<String, DateTime<Utc>>,
    params: &CloneParams,
) -> Result<Vec<CloneLink>, CloneError> {
    let per_snippet: Result<Vec<Vec<CloneLink>>, CloneError> = snippets
        .par_iter()
        .map(|s| {
            let matches = index.match_fingerprint(&s.fingerprint, params)?;
            let newer: Vec<bool> = matches.iter().map(|m| s.at < deployed[&m.candidate_id]).collect();
            let class = SnippetClass::of(&newer);
            Ok(matches
                .into_iter()
                .zip(newer)
                .map(|(m, newer)| CloneLink {
                    snippet_id: s.fingerprint.source_id.clone(),
                    contract_id: m.candidate_id,
                    epsilon: m.epsilon,
                    temporal_class: match (newer, class.source) {
                        (true, true) => TemporalClass::Source,
                        (true, false) => TemporalClass::Disseminator,
                        (false, _) => TemporalClass::All,
                    },
                })
                .collect())
        })
        .collect();
    let mut links: Vec<CloneLink> = per_snippet?.into_iter().flatten().collect();
    links.sort_by(|a, b| (&a.snippet_id, &a.contract_id).cmp(&(&b.snippet_id, &b.contract_id)));
    Ok(links)
}

/// Snippet id → class, for every snippet with at least one link.
pub fn classify(links: &[CloneLink]) -> BTreeMap<String, SnippetClass> {
    let mut newer: BTreeMap<String, Vec<bool>> = BTreeMap::new();
    for l in links {
        newer.entry(l.snippet_id.clone()).or_default().push(l.temporal_class != TemporalClass::All);
    }
    newer.into_iter().map(|(k, v)| (k, SnippetClass::of(&v))).collect()
}

/// Whether a link counts towards `class`: every link is in `All`; a link is in
/// `Disseminator` when its contract postdates the snippet; in `Source` when
/// additionally the snippet is a source.
pub fn link_in(link: &CloneLink, class: TemporalClass) -> bool {
    link.temporal_class >= class
}

#[cfg(test)]
mod tests {
    use super::*;

    fn at(year: i32) -> DateTime<Utc> {
        format!("{year}-06-01T00:00:00Z").parse().unwrap()
    }

    fn setup(contract_years: &[(&str, i32)]) -> Vec<CloneLink> {
        let mut idx = NgramIndex::new(3).unwrap();
        let mut deployed = HashMap::new();
        for (id, y) in contract_years {
            idx.add(Fingerprint::new(*id, ":AB.CDEFGHIJ").unwrap()).unwrap();
            deployed.insert(id.to_string(), at(*y));
        }
        idx.add(Fingerprint::new("other", ":zz.zzzzzzzz").unwrap()).unwrap();
        deployed.insert("other".into(), at(2022));
        let snippet = DatedFingerprint { fingerprint: Fingerprint::new("s", ".CDEFGHIJ").unwrap(), at: at(2020) };
        map_clones(&[snippet], &idx, &deployed, &CloneParams::default()).unwrap()
    }

    #[test]
    fn newer_contract_makes_a_source() {
        let links = setup(&[("c1", 2021)]);
        assert_eq!(links.len(), 1);
        assert_eq!(links[0].temporal_class, TemporalClass::Source);
        assert_eq!(classify(&links)["s"], SnippetClass { all: true, disseminator: true, source: true });
    }

    #[test]
    fn an_older_contract_demotes_to_disseminator() {
        let links = setup(&[("c1", 2021), ("c0", 2019)]);
        let classes: Vec<(String, TemporalClass)> =
            links.iter().map(|l| (l.contract_id.clone(), l.temporal_class)).collect();
        assert_eq!(
            classes,
            [("c0".to_string(), TemporalClass::All), ("c1".to_string(), TemporalClass::Disseminator)]
        );
        assert_eq!(classify(&links)["s"], SnippetClass { all: true, disseminator: true, source: false });
    }

    #[test]
    fn same_instant_is_not_newer() {
        let links = setup(&[("c1", 2020)]);
        assert_eq!(links[0].temporal_class, TemporalClass::All);
    }
}
