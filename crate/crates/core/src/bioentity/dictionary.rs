//! Per-type normalization dictionaries loaded from `id<TAB>name` files.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use num_rational::Ratio;

use super::{BioError, EntityType};
use crate::text::{clean, fold_key};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DictionaryStats {
    pub id_count: u64,
    pub name_count: u64,
    /// Exact ratio, so `avg_names_per_id * id_count == name_count` holds.
    pub avg_names_per_id: Ratio<u64>,
}

impl DictionaryStats {
    pub fn avg_as_f64(&self) -> f64 {
        *self.avg_names_per_id.numer() as f64 / *self.avg_names_per_id.denom() as f64
    }
}

#[derive(Debug, Clone)]
pub struct Dictionary {
    pub entity_type: EntityType,
    id_to_names: BTreeMap<String, BTreeSet<String>>,
    name_index: HashMap<String, String>,
    max_name_chars: usize,
    ambiguous_names: BTreeSet<String>,
}

impl Dictionary {
    pub fn new(entity_type: EntityType) -> Self {
        Self {
            entity_type,
            id_to_names: BTreeMap::new(),
            name_index: HashMap::new(),
            max_name_chars: 0,
            ambiguous_names: BTreeSet::new(),
        }
    }

    /// Adds one synonym. Returns `false` if the (id, name) pair was present.
    ///
    /// A folded name claimed by several IDs resolves to the smallest ID.
    pub fn insert(&mut self, id: &str, name: &str) -> bool {
        let id = clean(id);
        let name = clean(name);
        let key = fold_key(&name);
        self.max_name_chars = self.max_name_chars.max(key.chars().count());
        match self.name_index.get_mut(&key) {
            Some(existing) if *existing != id => {
                self.ambiguous_names.insert(key);
                if id < *existing {
                    *existing = id.clone();
                }
            }
            Some(_) => {}
            None => {
                self.name_index.insert(key, id.clone());
            }
        }
        self.id_to_names.entry(id).or_default().insert(name)
    }

    /// Unions another dictionary of the same type into this one.
    pub fn merge(&mut self, other: &Dictionary) {
        for (id, names) in &other.id_to_names {
            for name in names {
                self.insert(id, name);
            }
        }
    }

    pub fn names_of(&self, id: &str) -> Option<&BTreeSet<String>> {
        self.id_to_names.get(id)
    }

    pub fn contains_id(&self, id: &str) -> bool {
        self.id_to_names.contains_key(id)
    }

    /// Exact lookup of an already folded key.
    pub fn lookup_folded(&self, key: &str) -> Option<&str> {
        self.name_index.get(key).map(String::as_str)
    }

    pub fn max_name_chars(&self) -> usize {
        self.max_name_chars
    }

    /// Folded names mapped from more than one ID.
    pub fn ambiguous_names(&self) -> &BTreeSet<String> {
        &self.ambiguous_names
    }

    pub fn stats(&self) -> DictionaryStats {
        let id_count = self.id_to_names.len() as u64;
        let name_count: u64 = self.id_to_names.values().map(|n| n.len() as u64).sum();
        let avg_names_per_id = if id_count == 0 {
            Ratio::from_integer(0)
        } else {
            Ratio::new(name_count, id_count)
        };
        DictionaryStats {
            id_count,
            name_count,
            avg_names_per_id,
        }
    }
}

pub fn load_dictionary(path: &Path, entity_type: EntityType) -> Result<Dictionary, BioError> {
    let file = File::open(path).map_err(|source| BioError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let mut dict = Dictionary::new(entity_type);
    read_dictionary(BufReader::new(file), &mut dict, &path.display().to_string())?;
    Ok(dict)
}

/// Reads `id<TAB>name` lines into `dict`, so several files can be merged.
pub fn read_dictionary<R: BufRead>(reader: R, dict: &mut Dictionary, origin: &str) -> Result<(), BioError> {
    for (idx, line) in reader.lines().enumerate() {
        let line = line.map_err(|source| BioError::Io {
            path: origin.to_string(),
            source,
        })?;
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        let err = |message: &str| BioError::DictionaryLine {
            origin: origin.to_string(),
            line: idx + 1,
            message: message.to_string(),
        };
        let (id, name) = line.split_once('\t').ok_or_else(|| err("expected id<TAB>name"))?;
        if id.trim().is_empty() {
            return Err(err("empty id"));
        }
        if name.trim().is_empty() {
            return Err(err("empty name"));
        }
        dict.insert(id, name);
    }
    Ok(())
}

/// Case-folded, NFC-normalized exact lookup.
pub fn normalize_mention(mention: &str, dictionary: &Dictionary) -> Option<String> {
    let key = fold_key(mention);
    if key.is_empty() {
        return None;
    }
    dictionary.lookup_folded(&key).map(str::to_string)
}

/// One dictionary per entity type.
#[derive(Debug, Clone, Default)]
pub struct Dictionaries {
    by_type: BTreeMap<EntityType, Dictionary>,
}

impl Dictionaries {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, dict: Dictionary) {
        match self.by_type.get_mut(&dict.entity_type) {
            Some(existing) => existing.merge(&dict),
            None => {
                self.by_type.insert(dict.entity_type, dict);
            }
        }
    }

    pub fn get(&self, t: EntityType) -> Option<&Dictionary> {
        self.by_type.get(&t)
    }

    pub fn iter(&self) -> impl Iterator<Item = &Dictionary> {
        self.by_type.values()
    }
}
