use std::collections::{BTreeMap, HashMap, HashSet};
use std::path::Path;

use super::tables::{match_key, CountryTable};
use super::{AffilError, AffiliationFields};
use crate::ingest::{load_tabular, GazetteerRow, SchemaName};

#[derive(Debug, Clone, PartialEq)]
pub struct GazetteerEntry {
    pub city: String,
    pub state: String,
    pub country: String,
    pub latitude: f64,
    pub longitude: f64,
    pub fips: Option<u32>,
}

type Key3 = (String, String, String);

#[derive(Debug, Clone, Default)]
pub struct Gazetteer {
    entries: Vec<GazetteerEntry>,
    exact: HashMap<Key3, usize>,
    by_city_country: HashMap<(String, String), Vec<usize>>,
    cities: HashSet<String>,
    states: HashMap<String, HashSet<String>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum GeocodeOutcome {
    Exact,
    CityCountry,
    Ambiguous,
    NotFound,
    NoCity,
}

impl Gazetteer {
    /// Country names are canonicalized through `countries` so that
    /// `"USA"` and `"United States"` key identically.
    pub fn from_rows(rows: Vec<GazetteerRow>, countries: &CountryTable) -> Result<Self, AffilError> {
        let mut g = Gazetteer::default();
        for (i, row) in rows.into_iter().enumerate() {
            let line = i + 2;
            if !(-90.0..=90.0).contains(&row.latitude) || !(-180.0..=180.0).contains(&row.longitude) {
                return Err(AffilError::Gazetteer {
                    line,
                    message: format!("coordinates out of range ({}, {})", row.latitude, row.longitude),
                });
            }
            let country = countries.canonicalize(&row.country).unwrap_or(row.country.trim()).to_string();
            let entry = GazetteerEntry {
                city: row.city.trim().to_string(),
                state: row.state.unwrap_or_default().trim().to_string(),
                country,
                latitude: row.latitude,
                longitude: row.longitude,
                fips: row.fips,
            };
            let (c, s, k) = (match_key(&entry.city), match_key(&entry.state), match_key(&entry.country));
            if c.is_empty() {
                return Err(AffilError::Gazetteer { line, message: "empty city".into() });
            }
            let key = (c.clone(), s.clone(), k.clone());
            if g.exact.contains_key(&key) {
                return Err(AffilError::Gazetteer {
                    line,
                    message: format!("duplicate key ({}, {}, {})", entry.city, entry.state, entry.country),
                });
            }
            let idx = g.entries.len();
            g.exact.insert(key, idx);
            g.by_city_country.entry((c.clone(), k.clone())).or_default().push(idx);
            g.cities.insert(c);
            if !s.is_empty() {
                g.states.entry(s).or_default().insert(k);
            }
            g.entries.push(entry);
        }
        Ok(g)
    }

    pub fn load(path: &Path, countries: &CountryTable) -> Result<Self, AffilError> {
        let rows: Vec<GazetteerRow> = load_tabular(path, SchemaName::Gazetteer)?;
        Self::from_rows(rows, countries)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[GazetteerEntry] {
        &self.entries
    }

    pub fn has_city(&self, name: &str, country: Option<&str>) -> bool {
        let c = match_key(name);
        match country {
            Some(k) => self.by_city_country.contains_key(&(c, match_key(k))),
            None => self.cities.contains(&c),
        }
    }

    pub fn has_state(&self, name: &str, country: Option<&str>) -> bool {
        match self.states.get(&match_key(name)) {
            Some(countries) => country.is_none_or(|k| countries.contains(&match_key(k))),
            None => false,
        }
    }

    pub fn lookup(&self, city: &str, state: Option<&str>, country: Option<&str>) -> (Option<&GazetteerEntry>, GeocodeOutcome) {
        let Some(country) = country else {
            return (None, GeocodeOutcome::NotFound);
        };
        let (c, k) = (match_key(city), match_key(country));
        if let Some(state) = state {
            if let Some(&i) = self.exact.get(&(c.clone(), match_key(state), k.clone())) {
                return (Some(&self.entries[i]), GeocodeOutcome::Exact);
            }
        }
        match self.by_city_country.get(&(c, k)).map(Vec::as_slice) {
            Some([i]) => (Some(&self.entries[*i]), GeocodeOutcome::CityCountry),
            Some([_, _, ..]) => (None, GeocodeOutcome::Ambiguous),
            _ => (None, GeocodeOutcome::NotFound),
        }
    }
}

/// Fills coordinates and FIPS from the gazetteer; both coordinates or
/// neither are set.
pub fn geocode(fields: &mut AffiliationFields, gazetteer: &Gazetteer) -> GeocodeOutcome {
    let Some(city) = fields.city.as_deref() else {
        return GeocodeOutcome::NoCity;
    };
    let (entry, outcome) = gazetteer.lookup(city, fields.state.as_deref(), fields.country.as_deref());
    if let Some(e) = entry {
        fields.latitude = Some(e.latitude);
        fields.longitude = Some(e.longitude);
        fields.fips = e.fips;
    }
    outcome
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct GeocodeStats {
    pub counts: BTreeMap<GeocodeOutcome, usize>,
}

impl GeocodeStats {
    pub fn record(&mut self, outcome: GeocodeOutcome) {
        *self.counts.entry(outcome).or_default() += 1;
    }

    pub fn get(&self, outcome: GeocodeOutcome) -> usize {
        self.counts.get(&outcome).copied().unwrap_or(0)
    }
}
