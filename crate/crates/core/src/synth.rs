//! Deterministic synthetic inputs: citation XML, two author clusterings,
//! dictionaries, a gazetteer, ExPORTER and ORCID extracts and a pipeline
//! config that ties them together.
//!
//! Output depends only on [`SynthParams`]; the generator uses ChaCha8 so the
//! bytes are stable across platforms.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::Path;

use quick_xml::escape::escape;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::ingest::{
    write_tabular, ExporterProjectRow, ExporterPubRow, GazetteerRow, OrcidAffiliationRow, OrcidPersonRow,
    OrcidWorkRow, SchemaName,
};
use crate::linkage::orcid_checksum_valid;
use crate::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SynthParams {
    pub papers: usize,
    pub researchers: usize,
    pub seed: u64,
    pub first_pmid: u64,
}

impl Default for SynthParams {
    fn default() -> Self {
        SynthParams {
            papers: 100,
            researchers: 40,
            seed: 7,
            first_pmid: 10_000_001,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SynthSummary {
    pub papers: usize,
    pub author_instances: usize,
    pub collective_authors: usize,
    pub researchers: usize,
}

const SURNAMES: &[&str] = &[
    "Smith", "Garcia", "Chen", "Müller", "Rossi", "Nakamura", "Kowalski", "O'Brien", "Pietranico", "Maneksha",
    "Johansson", "Dubois", "Silva", "Kim", "Novak", "Ibrahim", "Schmidt", "Petrov", "Andersen", "Okafor",
    "Zhang", "Lopez", "Wang", "Cohen",
];
const FORENAMES: &[&str] = &[
    "John", "Maria", "Wei", "Anna", "Luca", "Yuki", "Piotr", "Sean", "Rosa", "Sunil", "Erik", "Claire", "Ana",
    "Min", "Jan", "Amira", "Jürgen", "Olga", "Lars", "Chidi", "Li", "Carmen", "Jing", "David",
];

const JOURNALS: &[&str] = &[
    "Journal of Synthetic Biology",
    "Cancer Research Letters",
    "Clinical Genomics",
    "Annals of Applied Immunology",
    "Virology Reports",
];

// (id, names) per dictionary
const GENES: &[(&str, &[&str])] = &[
    ("673", &["BRAF", "B-Raf proto-oncogene"]),
    ("7157", &["TP53", "tumor protein p53", "p53"]),
    ("1956", &["EGFR", "epidermal growth factor receptor"]),
    ("3845", &["KRAS"]),
    ("59272", &["ACE2", "angiotensin converting enzyme 2"]),
    ("3586", &["IL10", "interleukin 10"]),
];
const DISEASES: &[(&str, &[&str])] = &[
    ("MESH:D008545", &["melanoma", "malignant melanoma"]),
    ("MESH:D002289", &["non-small cell lung cancer", "NSCLC"]),
    ("MESH:D000086382", &["COVID-19", "coronavirus disease 2019"]),
    ("MESH:D003920", &["diabetes mellitus", "diabetes"]),
    ("MESH:D001943", &["breast cancer", "breast neoplasms"]),
    ("MESH:D008175", &["lung cancer", "KRAS-mutant lung cancer"]),
];
const DRUGS: &[(&str, &[&str])] = &[
    ("MESH:C551177", &["dabrafenib"]),
    ("MESH:D000068877", &["imatinib", "Gleevec"]),
    ("MESH:D008727", &["methotrexate"]),
    ("MESH:C000606551", &["remdesivir"]),
];
const SPECIES: &[(&str, &[&str])] = &[
    ("9606", &["human", "humans", "patients"]),
    ("10090", &["mouse", "mice"]),
    ("2697049", &["SARS-CoV-2"]),
];
const MUTATIONS: &[(&str, &[&str])] = &[
    ("rs113488022", &["p.V600E", "V600E"]),
    ("rs121913529", &["p.G12D", "G12D"]),
    ("rs28934578", &["p.R175H"]),
];
const MUTATION_MENTIONS: &[&str] = &["V600E", "Val600Glu", "p.G12D", "R175H", "c.1799T>A", "rs113488022"];

struct Place {
    city: &'static str,
    state: &'static str,
    country: &'static str,
    written_country: &'static str,
    zip: &'static str,
    lat: f64,
    lon: f64,
    fips: Option<u32>,
}

const PLACES: &[Place] = &[
    Place { city: "Boston", state: "MA", country: "United States", written_country: "USA", zip: "02115", lat: 42.3601, lon: -71.0589, fips: Some(25025) },
    Place { city: "Champaign", state: "IL", country: "United States", written_country: "USA", zip: "61820", lat: 40.1164, lon: -88.2434, fips: Some(17019) },
    Place { city: "Houston", state: "TX", country: "United States", written_country: "United States", zip: "77030", lat: 29.7604, lon: -95.3698, fips: Some(48201) },
    Place { city: "Seoul", state: "", country: "Korea", written_country: "Korea", zip: "", lat: 37.5665, lon: 126.978, fips: None },
    Place { city: "Heidelberg", state: "", country: "Germany", written_country: "Germany", zip: "", lat: 49.3988, lon: 8.6724, fips: None },
    Place { city: "Toronto", state: "Ontario", country: "Canada", written_country: "Canada", zip: "", lat: 43.6532, lon: -79.3832, fips: None },
    Place { city: "London", state: "", country: "United Kingdom", written_country: "UK", zip: "", lat: 51.5074, lon: -0.1278, fips: None },
    Place { city: "Beijing", state: "", country: "China", written_country: "China", zip: "", lat: 39.9042, lon: 116.4074, fips: None },
];

const DEPARTMENTS: &[&str] = &[
    "Department of Pathology",
    "Department of Medicine",
    "Dept. of Biochemistry",
    "Division of Oncology",
    "School of Public Health",
];
const INSTITUTIONS: &[&str] = &[
    "University of Example",
    "Example Medical Center",
    "National Institute of Examples",
    "Example University Hospital",
    "Example Pharmaceuticals Inc",
];

struct Researcher {
    last: String,
    fore: String,
    place: usize,
    dept: usize,
    inst: usize,
    email: Option<String>,
    orcid: Option<String>,
    pi_id: Option<String>,
}

impl Researcher {
    fn initials(&self) -> String {
        self.fore.chars().next().map(|c| c.to_string()).unwrap_or_default()
    }

    fn affiliation(&self) -> String {
        let p = &PLACES[self.place];
        let mut s = format!("{}, {}, {}", DEPARTMENTS[self.dept], INSTITUTIONS[self.inst], p.city);
        if !p.state.is_empty() {
            s.push_str(", ");
            s.push_str(p.state);
            if !p.zip.is_empty() {
                s.push(' ');
                s.push_str(p.zip);
            }
        }
        s.push_str(", ");
        s.push_str(p.written_country);
        s.push('.');
        if let Some(e) = &self.email {
            s.push_str(" Electronic address: ");
            s.push_str(e);
            s.push('.');
        }
        s
    }
}

enum AuthorSlot {
    Person { researcher: usize, with_affiliation: bool },
    Collective(String),
}

struct Paper {
    pmid: u64,
    year: i32,
    journal: &'static str,
    title: String,
    doi: Option<String>,
    abstract_text: Option<String>,
    authors: Vec<AuthorSlot>,
}

struct World {
    researchers: Vec<Researcher>,
    papers: Vec<Paper>,
}

fn orcid_id(rng: &mut ChaCha8Rng) -> String {
    let digits: String = (0..15).map(|_| char::from(b'0' + rng.gen_range(0..10u8))).collect();
    let base = format!("{}-{}-{}-{}", &digits[0..4], &digits[4..8], &digits[8..12], &digits[12..15]);
    "0123456789X"
        .chars()
        .map(|c| format!("{base}{c}"))
        .find(|id| orcid_checksum_valid(id))
        .expect("one check character is valid")
}

fn pick_name(rng: &mut ChaCha8Rng, dict: &[(&str, &[&str])]) -> String {
    let (_, names) = dict.choose(rng).unwrap();
    names.choose(rng).unwrap().to_string()
}

fn abstract_text(rng: &mut ChaCha8Rng) -> String {
    let gene = pick_name(rng, GENES);
    let disease = pick_name(rng, DISEASES);
    let drug = pick_name(rng, DRUGS);
    let species = pick_name(rng, SPECIES);
    let mutation = MUTATION_MENTIONS.choose(rng).unwrap();
    let mut s = String::new();
    match rng.gen_range(0..4) {
        0 => write!(s, "We studied {gene} {mutation} in {species} with {disease}."),
        1 => write!(s, "The {gene} gene was altered in {disease}; {drug} reduced growth in {species}."),
        2 => write!(s, "Patients with {disease} carrying {mutation} responded to {drug}."),
        _ => write!(s, "Expression of {gene}, and the {mutation} variant, was measured in {species}."),
    }
    .unwrap();
    if rng.gen_bool(0.5) {
        let g2 = pick_name(rng, GENES);
        write!(s, " Levels of {g2} & {drug} were \"stable\" (n = {}).", rng.gen_range(5..500)).unwrap();
    }
    s
}

fn build_world(p: &SynthParams) -> World {
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let researchers: Vec<Researcher> = (0..p.researchers.max(1))
        .map(|i| {
            let last = SURNAMES[i % SURNAMES.len()].to_string();
            let fore = FORENAMES[(i / SURNAMES.len() + i * 7) % FORENAMES.len()].to_string();
            let email = rng
                .gen_bool(0.3)
                .then(|| format!("{}.{}@example.org", fore.to_ascii_lowercase(), i));
            Researcher {
                place: rng.gen_range(0..PLACES.len()),
                dept: rng.gen_range(0..DEPARTMENTS.len()),
                inst: rng.gen_range(0..INSTITUTIONS.len()),
                email,
                orcid: rng.gen_bool(0.5).then(|| orcid_id(&mut rng)),
                pi_id: rng.gen_bool(0.4).then(|| format!("{}", 1_000_000 + i * 13)),
                last,
                fore,
            }
        })
        .collect();

    let papers = (0..p.papers)
        .map(|k| {
            let pmid = p.first_pmid + k as u64;
            let year = rng.gen_range(2000..=2020);
            let n = rng.gen_range(1..=6).min(researchers.len());
            let mut people: Vec<usize> = (0..researchers.len()).collect();
            people.shuffle(&mut rng);
            let mut authors: Vec<AuthorSlot> = people[..n]
                .iter()
                .map(|&r| AuthorSlot::Person {
                    researcher: r,
                    with_affiliation: !(year >= 2016 && rng.gen_bool(0.5)),
                })
                .collect();
            if rng.gen_bool(0.05) {
                authors.push(AuthorSlot::Collective("Synthetic Study Consortium".into()));
            }
            let topic = pick_name(&mut rng, GENES);
            let title = format!("{} in {} cohort {}.", topic, pick_name(&mut rng, DISEASES), k + 1);
            Paper {
                pmid,
                year,
                journal: JOURNALS.choose(&mut rng).unwrap(),
                title,
                doi: rng.gen_bool(0.8).then(|| format!("10.5555/synth.{pmid}")),
                abstract_text: rng.gen_bool(0.95).then(|| abstract_text(&mut rng)),
                authors,
            }
        })
        .collect();
    World { researchers, papers }
}

fn citation_xml_of(world: &World) -> String {
    let mut s = String::from("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<PubmedArticleSet>\n");
    for p in &world.papers {
        write!(
            s,
            " <PubmedArticle>\n  <MedlineCitation Status=\"MEDLINE\">\n   <PMID Version=\"1\">{}</PMID>\n   <Article>\n    \
             <Journal><JournalIssue><PubDate><Year>{}</Year></PubDate></JournalIssue><Title>{}</Title></Journal>\n    \
             <ArticleTitle>{}</ArticleTitle>\n",
            p.pmid,
            p.year,
            escape(p.journal),
            escape(p.title.as_str())
        )
        .unwrap();
        if let Some(doi) = &p.doi {
            writeln!(s, "    <ELocationID EIdType=\"doi\" ValidYN=\"Y\">{}</ELocationID>", escape(doi.as_str())).unwrap();
        }
        if let Some(a) = &p.abstract_text {
            writeln!(s, "    <Abstract><AbstractText>{}</AbstractText></Abstract>", escape(a.as_str())).unwrap();
        }
        s.push_str("    <AuthorList CompleteYN=\"Y\">\n");
        for a in &p.authors {
            match a {
                AuthorSlot::Person {
                    researcher,
                    with_affiliation,
                } => {
                    let r = &world.researchers[*researcher];
                    write!(
                        s,
                        "     <Author ValidYN=\"Y\"><LastName>{}</LastName><ForeName>{}</ForeName><Initials>{}</Initials>",
                        escape(r.last.as_str()),
                        escape(r.fore.as_str()),
                        r.initials()
                    )
                    .unwrap();
                    if *with_affiliation {
                        write!(
                            s,
                            "<AffiliationInfo><Affiliation>{}</Affiliation></AffiliationInfo>",
                            escape(r.affiliation().as_str())
                        )
                        .unwrap();
                    }
                    s.push_str("</Author>\n");
                }
                AuthorSlot::Collective(name) => {
                    writeln!(s, "     <Author ValidYN=\"Y\"><CollectiveName>{}</CollectiveName></Author>", escape(name.as_str()))
                        .unwrap();
                }
            }
        }
        s.push_str("    </AuthorList>\n   </Article>\n  </MedlineCitation>\n </PubmedArticle>\n");
    }
    s.push_str("</PubmedArticleSet>\n");
    s
}

/// Citation XML alone, as used for throughput checks.
pub fn citation_xml(params: &SynthParams) -> String {
    citation_xml_of(&build_world(params))
}

fn clusterings(world: &World, seed: u64) -> (String, String) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    // secondary splits some researchers and lumps some pairs
    let sec_id: Vec<u64> = (0..world.researchers.len()).map(|r| 700_000 + (r as u64 / 2) * 2).collect();
    let lumped: Vec<bool> = (0..world.researchers.len()).map(|_| rng.gen_bool(0.1)).collect();
    let mut primary = String::new();
    let mut secondary = String::new();
    for p in &world.papers {
        for (i, a) in p.authors.iter().enumerate() {
            let AuthorSlot::Person { researcher: r, .. } = a else { continue };
            let order = i + 1;
            let r = *r;
            if p.year <= 2009 && rng.gen_bool(0.9) {
                let id = if rng.gen_bool(0.03) { 1000 + rng.gen_range(0..world.researchers.len()) } else { 1000 + r };
                writeln!(primary, "{}\t{}\t{}", p.pmid, order, id).unwrap();
            }
            if rng.gen_bool(0.85) {
                let base = if lumped[r] { sec_id[r] } else { 700_000 + 2 * world.researchers.len() as u64 + r as u64 };
                let id = if rng.gen_bool(0.1) { base + 500_000 } else { base };
                writeln!(secondary, "{}\t{}\t{}", p.pmid, order, id).unwrap();
            }
        }
    }
    (primary, secondary)
}

fn dictionary_text(entries: &[(&str, &[&str])]) -> String {
    let mut s = String::new();
    for (id, names) in entries {
        for n in *names {
            writeln!(s, "{id}\t{n}").unwrap();
        }
    }
    s
}

fn csv_bytes<T: crate::ingest::TabularRecord>(schema: SchemaName, rows: &[T]) -> Vec<u8> {
    let mut out = Vec::new();
    write_tabular(&mut out, schema, rows).expect("in-memory write");
    out
}

fn pi_name(r: &Researcher) -> String {
    format!("{}, {}", deunicode::deunicode(&r.last).to_uppercase(), r.fore.to_uppercase())
}

fn exporter(world: &World, seed: u64) -> (Vec<ExporterProjectRow>, Vec<ExporterPubRow>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xe8);
    let mut authored: BTreeMap<usize, Vec<u64>> = BTreeMap::new();
    for p in &world.papers {
        for a in &p.authors {
            if let AuthorSlot::Person { researcher, .. } = a {
                authored.entry(*researcher).or_default().push(p.pmid);
            }
        }
    }
    let mut projects = Vec::new();
    let mut pubs = Vec::new();
    let mut n = 0;
    for (i, r) in world.researchers.iter().enumerate() {
        let Some(pi) = &r.pi_id else { continue };
        n += 1;
        let number = format!("R01GM{:06}", 100_000 + n);
        for fy in [2010, 2011] {
            projects.push(ExporterProjectRow {
                pi_id: pi.clone(),
                pi_name: pi_name(r),
                project_number: number.clone(),
                sub_project_number: None,
                fiscal_year: Some(fy),
            });
        }
        for &pmid in authored.get(&i).into_iter().flatten() {
            if rng.gen_bool(0.8) {
                pubs.push(ExporterPubRow {
                    pmid,
                    project_number: number.clone(),
                });
            }
        }
        if let Some(p) = world.papers.choose(&mut rng) {
            pubs.push(ExporterPubRow {
                pmid: p.pmid,
                project_number: number.clone(),
            });
        }
    }
    // one project without articles and one with two PIs
    let pis: Vec<&Researcher> = world.researchers.iter().filter(|r| r.pi_id.is_some()).collect();
    if let Some(r) = pis.first() {
        projects.push(ExporterProjectRow {
            pi_id: r.pi_id.clone().unwrap(),
            pi_name: pi_name(r),
            project_number: "R21AA999999".into(),
            sub_project_number: Some("0001".into()),
            fiscal_year: Some(2012),
        });
    }
    if pis.len() >= 2 {
        for r in &pis[..2] {
            projects.push(ExporterProjectRow {
                pi_id: r.pi_id.clone().unwrap(),
                pi_name: pi_name(r),
                project_number: "P01CA888888".into(),
                sub_project_number: None,
                fiscal_year: Some(2013),
            });
        }
        if let Some(p) = world.papers.first() {
            pubs.push(ExporterPubRow {
                pmid: p.pmid,
                project_number: "P01CA888888".into(),
            });
        }
    }
    pubs.sort_by(|a, b| (a.pmid, &a.project_number).cmp(&(b.pmid, &b.project_number)));
    pubs.dedup();
    (projects, pubs)
}

type OrcidExtract = (Vec<OrcidPersonRow>, Vec<OrcidWorkRow>, Vec<OrcidAffiliationRow>, Vec<OrcidAffiliationRow>);

fn orcid(world: &World, seed: u64) -> OrcidExtract {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x0c1d);
    let (mut persons, mut works, mut emps, mut edus) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    for (i, r) in world.researchers.iter().enumerate() {
        let Some(id) = &r.orcid else { continue };
        persons.push(OrcidPersonRow {
            orcid: id.clone(),
            family_name: Some(r.last.clone()),
            given_name: Some(r.fore.clone()),
        });
        for p in &world.papers {
            let mine = p
                .authors
                .iter()
                .any(|a| matches!(a, AuthorSlot::Person { researcher, .. } if *researcher == i));
            if !mine || rng.gen_bool(0.3) {
                continue;
            }
            works.push(OrcidWorkRow {
                orcid: id.clone(),
                doi: p.doi.as_ref().map(|d| format!("https://doi.org/{}", d.to_uppercase())),
                title: Some(p.title.clone()),
                journal: Some(p.journal.to_string()),
                pub_year: Some(p.year),
            });
        }
        let place = &PLACES[r.place];
        let row = |org: &str, dept: Option<&str>, begin: Option<i32>, end: Option<i32>, role: &str| OrcidAffiliationRow {
            orcid: id.clone(),
            organization: org.to_string(),
            department: dept.map(str::to_string),
            city: Some(place.city.to_string()),
            region: (!place.state.is_empty()).then(|| place.state.to_string()),
            country: Some(place.country.to_string()),
            begin_year: begin,
            end_year: end,
            role: Some(role.to_string()),
            identifier: Some(format!("grid.{}", 1000 + r.inst)),
            id_source: Some("GRID".into()),
        };
        let start = rng.gen_range(1995..2010);
        emps.push(row(INSTITUTIONS[r.inst], Some(DEPARTMENTS[r.dept]), Some(start), None, "Professor, \"senior\""));
        edus.push(row("University of Example", None, Some(start - 6), Some(start - 1), "PhD"));
    }
    // an invalid iD is skipped by the assembler
    persons.push(OrcidPersonRow {
        orcid: "0000-0000-0000-0000".into(),
        family_name: Some("Nobody".into()),
        given_name: Some("N".into()),
    });
    (persons, works, emps, edus)
}

fn gazetteer_rows() -> Vec<GazetteerRow> {
    PLACES
        .iter()
        .map(|p| GazetteerRow {
            city: p.city.to_string(),
            state: (!p.state.is_empty()).then(|| p.state.to_string()),
            country: p.country.to_string(),
            latitude: p.lat,
            longitude: p.lon,
            fips: p.fips,
        })
        .collect()
}

const CONFIG: &str = r#"out_dir = "out"
jobs = 1
cutoff_year = 2016
primary_coverage_end_year = 2009
averaging = "micro"

[inputs]
citations = ["citations.xml"]
primary_clustering = "primary.tsv"
secondary_clustering = "secondary.tsv"
gazetteer = "gazetteer.csv"
exporter_projects = "exporter_projects.csv"
exporter_pubs = "exporter_pubs.csv"
orcid_person = "orcid_person.csv"
orcid_works = "orcid_works.csv"
orcid_employment = "orcid_employment.csv"
orcid_education = "orcid_education.csv"

[inputs.dictionaries]
gene = ["dict/gene.tsv"]
disease = ["dict/disease.tsv"]
drug = ["dict/drug.tsv"]
species = ["dict/species.tsv"]
mutation = ["dict/mutation.tsv"]
"#;

/// Writes a complete fixture into `dir`, including `pipeline.toml` whose
/// relative paths resolve against `dir`.
pub fn write_fixture(dir: &Path, params: &SynthParams) -> Result<SynthSummary, Error> {
    let world = build_world(params);
    let (primary, secondary) = clusterings(&world, params.seed);
    let (projects, pubs) = exporter(&world, params.seed);
    let (persons, works, emps, edus) = orcid(&world, params.seed);

    let mut files: Vec<(&str, Vec<u8>)> = vec![
        ("citations.xml", citation_xml_of(&world).into_bytes()),
        ("primary.tsv", primary.into_bytes()),
        ("secondary.tsv", secondary.into_bytes()),
        ("dict/gene.tsv", dictionary_text(GENES).into_bytes()),
        ("dict/disease.tsv", dictionary_text(DISEASES).into_bytes()),
        ("dict/drug.tsv", dictionary_text(DRUGS).into_bytes()),
        ("dict/species.tsv", dictionary_text(SPECIES).into_bytes()),
        ("dict/mutation.tsv", dictionary_text(MUTATIONS).into_bytes()),
        ("gazetteer.csv", csv_bytes(SchemaName::Gazetteer, &gazetteer_rows())),
        ("exporter_projects.csv", csv_bytes(SchemaName::ExporterProjects, &projects)),
        ("exporter_pubs.csv", csv_bytes(SchemaName::ExporterPubs, &pubs)),
        ("orcid_person.csv", csv_bytes(SchemaName::OrcidPerson, &persons)),
        ("orcid_works.csv", csv_bytes(SchemaName::OrcidWorks, &works)),
        ("orcid_employment.csv", csv_bytes(SchemaName::OrcidEmployment, &emps)),
        ("orcid_education.csv", csv_bytes(SchemaName::OrcidEducation, &edus)),
    ];
    files.push(("pipeline.toml", CONFIG.as_bytes().to_vec()));

    for (name, bytes) in &files {
        let path = dir.join(name);
        let io = |source| Error::Io {
            path: path.clone(),
            source,
        };
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent).map_err(io)?;
        }
        fs::File::create(&path).and_then(|mut f| f.write_all(bytes)).map_err(io)?;
    }

    let mut summary = SynthSummary {
        papers: world.papers.len(),
        researchers: world.researchers.len(),
        ..Default::default()
    };
    for p in &world.papers {
        summary.author_instances += p.authors.len();
        summary.collective_authors += p.authors.iter().filter(|a| matches!(a, AuthorSlot::Collective(_))).count();
    }
    Ok(summary)
}
