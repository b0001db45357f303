use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::bioentity::EntityType;
use crate::evalmetrics::Averaging;
use crate::Error;

pub const DEFAULT_CUTOFF_YEAR: i32 = 2016;
pub const DEFAULT_PRIMARY_COVERAGE_END_YEAR: i32 = 2009;

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Inputs {
    #[serde(default)]
    pub citations: Vec<PathBuf>,
    pub primary_clustering: Option<PathBuf>,
    pub secondary_clustering: Option<PathBuf>,
    /// Entity type (lowercase) to one or more `id<TAB>name` files.
    #[serde(default)]
    pub dictionaries: BTreeMap<String, Vec<PathBuf>>,
    pub tagger_output: Option<PathBuf>,
    pub gazetteer: Option<PathBuf>,
    pub affiliation_tables: Option<PathBuf>,
    pub exporter_projects: Option<PathBuf>,
    pub exporter_pubs: Option<PathBuf>,
    pub orcid_person: Option<PathBuf>,
    pub orcid_works: Option<PathBuf>,
    pub orcid_employment: Option<PathBuf>,
    pub orcid_education: Option<PathBuf>,
    pub crosswalk: Option<PathBuf>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    #[serde(default)]
    inputs: Inputs,
    out_dir: Option<PathBuf>,
    jobs: Option<usize>,
    cutoff_year: Option<i32>,
    primary_coverage_end_year: Option<i32>,
    averaging: Option<String>,
}

#[derive(Debug, Clone)]
pub struct PipelineConfig {
    pub inputs: Inputs,
    pub out_dir: PathBuf,
    /// Worker threads; 0 means one per available core.
    pub jobs: usize,
    pub cutoff_year: i32,
    pub primary_coverage_end_year: i32,
    pub averaging: Averaging,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            inputs: Inputs::default(),
            out_dir: PathBuf::from("out"),
            jobs: 1,
            cutoff_year: DEFAULT_CUTOFF_YEAR,
            primary_coverage_end_year: DEFAULT_PRIMARY_COVERAGE_END_YEAR,
            averaging: Averaging::Micro,
        }
    }
}

fn rebase(base: &Path, p: &mut PathBuf) {
    if p.is_relative() {
        *p = base.join(&*p);
    }
}

impl PipelineConfig {
    /// Parses TOML; relative paths resolve against `base`.
    pub fn from_toml(text: &str, base: &Path) -> Result<Self, Error> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        let mut inputs = raw.inputs;
        for p in inputs.citations.iter_mut() {
            rebase(base, p);
        }
        for files in inputs.dictionaries.values_mut() {
            for p in files.iter_mut() {
                rebase(base, p);
            }
        }
        for p in [
            &mut inputs.primary_clustering,
            &mut inputs.secondary_clustering,
            &mut inputs.tagger_output,
            &mut inputs.gazetteer,
            &mut inputs.affiliation_tables,
            &mut inputs.exporter_projects,
            &mut inputs.exporter_pubs,
            &mut inputs.orcid_person,
            &mut inputs.orcid_works,
            &mut inputs.orcid_employment,
            &mut inputs.orcid_education,
            &mut inputs.crosswalk,
        ]
        .into_iter()
        .flatten()
        {
            rebase(base, p);
        }
        for key in inputs.dictionaries.keys() {
            key.parse::<EntityType>()
                .map_err(|_| Error::Config(format!("unknown dictionary entity type `{key}`")))?;
        }
        let mut out_dir = raw.out_dir.unwrap_or_else(|| PathBuf::from("out"));
        rebase(base, &mut out_dir);
        let averaging = match raw.averaging.as_deref() {
            None | Some("micro") => Averaging::Micro,
            Some("macro") => Averaging::Macro,
            Some(other) => return Err(Error::Config(format!("averaging must be `micro` or `macro`, not `{other}`"))),
        };
        Ok(PipelineConfig {
            inputs,
            out_dir,
            jobs: raw.jobs.unwrap_or(1),
            cutoff_year: raw.cutoff_year.unwrap_or(DEFAULT_CUTOFF_YEAR),
            primary_coverage_end_year: raw.primary_coverage_end_year.unwrap_or(DEFAULT_PRIMARY_COVERAGE_END_YEAR),
            averaging,
        })
    }

    pub fn load(path: &Path) -> Result<Self, Error> {
        let text = std::fs::read_to_string(path).map_err(|_| Error::MissingInput {
            what: "config".into(),
            path: path.to_path_buf(),
        })?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::from_toml(&text, base)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_and_rebasing() {
        let c = PipelineConfig::from_toml(
            "[inputs]\ncitations = [\"a.xml\"]\ngazetteer = \"/abs/g.csv\"\n[inputs.dictionaries]\ngene = [\"g.tsv\"]\n",
            Path::new("/base"),
        )
        .unwrap();
        assert_eq!(c.inputs.citations, vec![PathBuf::from("/base/a.xml")]);
        assert_eq!(c.inputs.gazetteer, Some(PathBuf::from("/abs/g.csv")));
        assert_eq!(c.inputs.dictionaries["gene"], vec![PathBuf::from("/base/g.tsv")]);
        assert_eq!((c.cutoff_year, c.primary_coverage_end_year, c.jobs), (2016, 2009, 1));
        assert_eq!(c.out_dir, PathBuf::from("/base/out"));
    }

    #[test]
    fn rejects_unknown_keys_and_types() {
        assert!(PipelineConfig::from_toml("bogus = 1", Path::new(".")).is_err());
        let e = PipelineConfig::from_toml("[inputs.dictionaries]\nplanet = []", Path::new(".")).unwrap_err();
        assert!(e.to_string().starts_with("config: unknown dictionary entity type"));
    }
}
