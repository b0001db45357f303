use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use pubkg::bioentity::{write_tagger_record, EntityType, Tag, TagDistribution, TaggerRecord};
use pubkg::ingest::Citation;
use pubkg::kgraph::ALL_TABLES;
use pubkg::pipeline::{Pipeline, PipelineConfig, Stage, StageReport};
use pubkg::synth::{write_fixture, SynthParams};
use pubkg::Error;

fn fixture(dir: &Path, jobs: usize) -> PipelineConfig {
    write_fixture(dir, &SynthParams::default()).unwrap();
    let mut cfg = PipelineConfig::load(&dir.join("pipeline.toml")).unwrap();
    cfg.out_dir = dir.join("out");
    cfg.jobs = jobs;
    cfg
}

fn count(reports: &[StageReport], stage: &str, key: &str) -> u64 {
    let r = reports.iter().find(|r| r.stage == stage).unwrap();
    r.counts[key].as_u64().unwrap_or_else(|| panic!("{stage}.{key} = {:?}", r.counts[key]))
}

fn data_rows(path: &Path) -> u64 {
    fs::read_to_string(path).unwrap().lines().count() as u64 - 1
}

#[test]
fn all_stages_reconcile() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = fixture(dir.path(), 2);
    let out = cfg.out_dir.clone();
    let reports = Pipeline::new(cfg).unwrap().run_all().unwrap();
    assert_eq!(reports.len(), Stage::ALL.len());

    for schema in ALL_TABLES {
        let text = fs::read_to_string(out.join(schema.file_name())).unwrap();
        assert_eq!(text.lines().next().unwrap(), schema.header());
    }
    let instances = count(&reports, "ingest", "author_instances");
    assert_eq!(data_rows(&out.join("Author_List.csv")), instances);
    assert_eq!(count(&reports, "emit", "rows_Author_List"), instances);
    assert_eq!(count(&reports, "tag", "spans"), count(&reports, "normalize", "mentions"));
    assert_eq!(data_rows(&out.join("Bio_entities_Main.csv")), count(&reports, "normalize", "mentions"));
    assert_eq!(
        data_rows(&out.join("Bio_entities_Mutation.csv")),
        count(&reports, "normalize", "mutations_normalized")
    );
    assert_eq!(data_rows(&out.join("NIH_Projects.csv")), count(&reports, "link", "nih_rows"));
    let strings = count(&reports, "affil", "affiliation_strings");
    let aff_rows = data_rows(&out.join("Affiliations.csv"));
    assert!(aff_rows >= strings && aff_rows <= strings + count(&reports, "affil", "inherited_instances"));
    assert_eq!(count(&reports, "affil", "instances"), instances);

    let lines = fs::read_to_string(out.join("run_report.jsonl")).unwrap();
    assert_eq!(lines.lines().count(), Stage::ALL.len());
    for line in lines.lines() {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        assert!(v["counts"].is_object() && v["warnings"].is_array() && v["duration_ms"].is_u64());
    }

    let bip = fs::read_to_string(out.join("graph/bipartite.csv")).unwrap();
    assert!(bip.lines().skip(1).all(|l| !l.starts_with("0,")));
    let eval = fs::read_to_string(out.join("eval/report.csv")).unwrap();
    assert!(eval.starts_with("metric,value\nprecision,"));
}

#[test]
fn dictionary_stats_multiply_out() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = fixture(dir.path(), 1);
    let out = cfg.out_dir.clone();
    let p = Pipeline::new(cfg).unwrap();
    for s in [Stage::Ingest, Stage::Tag, Stage::Normalize] {
        p.run(s).unwrap();
    }
    let text = fs::read_to_string(out.join("work/dictionary_stats.csv")).unwrap();
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let mut types = 0;
    for rec in rdr.records() {
        let rec = rec.unwrap();
        let ids: f64 = rec[1].parse().unwrap();
        let names: f64 = rec[2].parse().unwrap();
        let avg: f64 = rec[3].parse().unwrap();
        assert!((avg * ids - names).abs() < 1e-9, "{rec:?}");
        types += 1;
    }
    assert_eq!(types, 5);
}

#[test]
fn external_tagger_output_replaces_baseline() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = fixture(dir.path(), 1);
    let out = cfg.out_dir.clone();
    Pipeline::new(cfg.clone()).unwrap().run(Stage::Ingest).unwrap();

    let text = fs::read_to_string(out.join("work/citations.jsonl")).unwrap();
    let cits: Vec<Citation> = text.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    let tagger = dir.path().join("tagger.jsonl");
    let mut f = fs::File::create(&tagger).unwrap();
    let mut expected = BTreeMap::new();
    for c in &cits {
        let Some(a) = c.article.abstract_text.as_deref() else { continue };
        // tag the first word as a gene, split into two word pieces
        let first: usize = a.chars().take_while(|c| !c.is_whitespace()).count();
        if first < 2 {
            continue;
        }
        let tok = |s: usize, e: usize, tag: Tag| TagDistribution {
            text: a.chars().skip(s).take(e - s).collect(),
            start: Some(s),
            end: Some(e),
            probs: tag.one_hot(),
        };
        let structural = |tag: Tag| TagDistribution { text: String::new(), start: None, end: None, probs: tag.one_hot() };
        let rec = TaggerRecord {
            pmid: c.article.pmid,
            entity_type: EntityType::Gene,
            tokens: vec![structural(Tag::Cls), tok(0, 1, Tag::B), tok(1, first, Tag::X), structural(Tag::Sep)],
        };
        write_tagger_record(&mut f, &rec).unwrap();
        expected.insert(c.article.pmid, first);
    }
    drop(f);
    cfg.inputs.tagger_output = Some(tagger);
    let rep = Pipeline::new(cfg).unwrap().run(Stage::Tag).unwrap();
    assert_eq!(rep.counts["mode"], "tagger");
    assert_eq!(rep.counts["spans"].as_u64().unwrap() as usize, expected.len());
    let spans = fs::read_to_string(out.join("work/spans.jsonl")).unwrap();
    for line in spans.lines() {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        let pmid = v["pmid"].as_u64().unwrap();
        assert_eq!(v["start"], 0);
        assert_eq!(v["end"].as_u64().unwrap() as usize, expected[&pmid]);
    }
}

#[test]
fn missing_input_names_the_path() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = fixture(dir.path(), 1);
    cfg.inputs.citations = vec![dir.path().join("nope.xml")];
    let err = Pipeline::new(cfg).unwrap().run(Stage::Ingest).unwrap_err();
    assert!(matches!(err, Error::MissingInput { .. }));
    assert!(err.to_string().contains("nope.xml"), "{err}");
}

#[test]
fn stage_without_upstream_output_fails_cleanly() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = fixture(dir.path(), 1);
    let err = Pipeline::new(cfg).unwrap().run(Stage::Emit).unwrap_err();
    assert!(err.to_string().contains("citations"), "{err}");
}
