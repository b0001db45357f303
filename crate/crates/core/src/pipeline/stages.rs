use std::collections::{BTreeMap, HashMap, HashSet};
use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{create, open, optional, read_jsonl, require, write_jsonl, Layout, PipelineConfig, Stage, StageReport};
use crate::affilparse::{
    geocode, inherit_affiliations, AffiliationParser, Gazetteer, GeocodeOutcome, GeocodeStats, KeywordTables,
    ParsedAffiliation,
};
use crate::andmerge::{merge_clusterings, read_unified, validate_merge, write_conflicts, write_unified};
use crate::bioentity::{
    baseline_candidates, decode_tag_sequence, load_dictionary, normalize_mention, normalize_mutation,
    read_tagger_output, resolve_type_overlaps, Dictionaries, EntityMention, EntitySpan, EntityType, TaggerRecord,
};
use crate::evalmetrics::{evaluate, read_crosswalk, write_crosswalk, Crosswalk};
use crate::ingest::{
    load_clustering, load_tabular, parse_citation_xml, Citation, InstanceKey, OrcidAffiliationRow, ParseReport,
    SchemaName,
};
use crate::kgraph::{
    affiliation_rows, build_bipartite, derive_author_list_fields, emit_rows, entity_rows, project_authors,
    project_entities, researcher_rows, TableRow,
};
use crate::linkage::{
    assemble_nih_projects, assemble_orcid_records, build_eval_crosswalk, link_nih, link_orcid, write_links, Corpus,
    NihFunnel, NihProjectRow, OrcidRecord,
};
use crate::Error;

pub(super) fn run(stage: Stage, cfg: &PipelineConfig, layout: &Layout, rep: &mut StageReport) -> Result<(), Error> {
    match stage {
        Stage::Ingest => ingest(cfg, layout, rep),
        Stage::Tag => tag(cfg, layout, rep),
        Stage::Normalize => normalize(cfg, layout, rep),
        Stage::AndMerge => and_merge(cfg, layout, rep),
        Stage::Link => link(cfg, layout, rep),
        Stage::Affil => affil(cfg, layout, rep),
        Stage::Emit => emit(layout, rep),
        Stage::Graph => graph(layout, rep),
        Stage::Eval => eval(cfg, layout, rep),
    }
}

const CITATIONS: &str = "citations.jsonl";
const SPANS: &str = "spans.jsonl";
const MENTIONS: &str = "mentions.jsonl";
const UNIFIED: &str = "unified.tsv";
const AFFILIATIONS: &str = "affiliations.jsonl";
const ORCID_LINKED: &str = "orcid_linked.jsonl";
const NIH_ROWS: &str = "nih_rows.jsonl";
const CROSSWALK: &str = "crosswalk.csv";
const NIH_FUNNEL: &str = "nih_funnel.json";

fn io_err(path: &Path) -> impl Fn(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn load_citations(layout: &Layout) -> Result<Vec<Citation>, Error> {
    read_jsonl(&layout.work(CITATIONS), "citations intermediate (run `ingest` first)")
}

fn load_and_ids(layout: &Layout) -> Result<BTreeMap<InstanceKey, u64>, Error> {
    let path = layout.work(UNIFIED);
    let r = open(&path, "unified assignment (run `and-merge` first)")?;
    read_unified(r).map_err(|message| Error::Intermediate { path, line: 0, message })
}

fn load_dictionaries(cfg: &PipelineConfig, rep: &mut StageReport) -> Result<Dictionaries, Error> {
    let mut dicts = Dictionaries::new();
    for (ty, files) in &cfg.inputs.dictionaries {
        let ty: EntityType = ty.parse()?;
        for f in files {
            let p = require(&format!("dictionaries.{ty}"), Some(f))?;
            dicts.insert(load_dictionary(p, ty)?);
        }
    }
    if cfg.inputs.dictionaries.is_empty() {
        rep.warn("no dictionaries configured");
    }
    Ok(dicts)
}

fn ingest(cfg: &PipelineConfig, layout: &Layout, rep: &mut StageReport) -> Result<(), Error> {
    if cfg.inputs.citations.is_empty() {
        return Err(Error::Config("input `citations` is not configured".into()));
    }
    for p in &cfg.inputs.citations {
        require("citations", Some(p))?;
    }
    let parsed: Vec<(Vec<Citation>, ParseReport)> = cfg
        .inputs
        .citations
        .par_iter()
        .map(|p| -> Result<_, Error> {
            let mut reader = parse_citation_xml(open(p, "citations")?);
            let mut out = Vec::new();
            for c in &mut reader {
                out.push(c?);
            }
            Ok((out, reader.report().clone()))
        })
        .collect::<Result<_, _>>()?;

    let mut seen = HashSet::new();
    let mut all = Vec::new();
    let mut total = ParseReport::default();
    let mut duplicates = 0usize;
    for (cits, r) in parsed {
        total.skipped_missing_pmid += r.skipped_missing_pmid;
        total.invalid_utf8_sequences += r.invalid_utf8_sequences;
        total.years_missing += r.years_missing;
        total.years_out_of_range += r.years_out_of_range;
        total.collective_authors += r.collective_authors;
        for c in cits {
            if seen.insert(c.article.pmid) {
                all.push(c);
            } else {
                duplicates += 1;
            }
        }
    }
    let authors: usize = all.iter().map(|c| c.authors.len()).sum();
    rep.count("files", cfg.inputs.citations.len());
    rep.count("citations", all.len());
    rep.count("author_instances", authors);
    rep.count("skipped_missing_pmid", total.skipped_missing_pmid);
    rep.count("duplicate_pmids", duplicates);
    rep.count("invalid_utf8_sequences", total.invalid_utf8_sequences);
    rep.count("years_missing", total.years_missing);
    rep.count("years_out_of_range", total.years_out_of_range);
    rep.count("collective_authors", total.collective_authors);
    if total.skipped_missing_pmid > 0 {
        rep.warn(format!("{} citations without PMID skipped", total.skipped_missing_pmid));
    }
    if duplicates > 0 {
        rep.warn(format!("{duplicates} duplicate PMIDs dropped (first occurrence kept)"));
    }
    if total.invalid_utf8_sequences > 0 {
        rep.warn(format!("{} invalid UTF-8 sequences replaced", total.invalid_utf8_sequences));
    }
    write_jsonl(&layout.work(CITATIONS), &all)?;
    Ok(())
}

fn tag(cfg: &PipelineConfig, layout: &Layout, rep: &mut StageReport) -> Result<(), Error> {
    let citations = load_citations(layout)?;
    let mut by_pmid: BTreeMap<u64, Vec<EntitySpan>> = BTreeMap::new();
    if let Some(path) = optional("tagger_output", cfg.inputs.tagger_output.as_deref())? {
        rep.count("mode", "tagger");
        let abstracts: HashMap<u64, &str> = citations
            .iter()
            .map(|c| (c.article.pmid, c.article.abstract_text.as_deref().unwrap_or("")))
            .collect();
        let records: Vec<TaggerRecord> = read_tagger_output(open(path, "tagger_output")?).collect::<Result<_, _>>()?;
        let unknown = records.iter().filter(|r| !abstracts.contains_key(&r.pmid)).count();
        if unknown > 0 {
            rep.warn(format!("{unknown} tagger records name PMIDs outside the corpus"));
        }
        let decoded = records
            .par_iter()
            .filter_map(|r| abstracts.get(&r.pmid).map(|a| (r, *a)))
            .map(|(r, a)| decode_tag_sequence(r.pmid, &r.tokens, r.entity_type, a))
            .collect::<Result<Vec<_>, _>>()?;
        let orphans: usize = decoded.iter().map(|d| d.orphan_repairs).sum();
        rep.count("tagger_records", records.len());
        rep.count("orphan_repairs", orphans);
        for d in decoded {
            for s in d.spans {
                by_pmid.entry(s.pmid).or_default().push(s);
            }
        }
    } else {
        rep.count("mode", "baseline");
        let dicts = load_dictionaries(cfg, rep)?;
        let found: Vec<Vec<EntitySpan>> = citations
            .par_iter()
            .map(|c| baseline_candidates(c.article.pmid, c.article.abstract_text.as_deref().unwrap_or(""), &dicts))
            .collect();
        for spans in found.into_iter().filter(|s| !s.is_empty()) {
            by_pmid.insert(spans[0].pmid, spans);
        }
    }

    let resolved: Vec<_> = by_pmid.into_par_iter().map(|(_, spans)| resolve_type_overlaps(spans)).collect();
    let abstracts = citations
        .iter()
        .filter(|c| c.article.abstract_text.as_deref().is_some_and(|a| !a.is_empty()))
        .count();
    let with_overlap: usize = resolved.iter().map(|r| r.pmids_with_overlap.len()).sum();
    let dropped: usize = resolved.iter().map(|r| r.dropped.len()).sum();
    let kept: Vec<EntitySpan> = resolved.into_iter().flat_map(|r| r.kept).collect();
    rep.count("abstracts", abstracts);
    rep.count("spans", kept.len());
    rep.count("dropped_overlaps", dropped);
    rep.count("abstracts_with_overlap", with_overlap);
    rep.count("overlap_rate", crate::bioentity::overlap_rate(with_overlap, abstracts));
    write_jsonl(&layout.work(SPANS), &kept)?;
    Ok(())
}

fn normalize(cfg: &PipelineConfig, layout: &Layout, rep: &mut StageReport) -> Result<(), Error> {
    let spans: Vec<EntitySpan> = read_jsonl(&layout.work(SPANS), "span intermediate (run `tag` first)")?;
    let dicts = load_dictionaries(cfg, rep)?;
    let mentions: Vec<EntityMention> = spans
        .into_par_iter()
        .map(|span| {
            let dict = dicts.get(span.entity_type);
            let mut entity_id = dict.and_then(|d| normalize_mention(&span.mention, d));
            let mutation = (span.entity_type == EntityType::Mutation)
                .then(|| normalize_mutation(&span.mention))
                .flatten();
            if entity_id.is_none() {
                if let (Some(d), Some(m)) = (dict, &mutation) {
                    entity_id = normalize_mention(&m.normalized_name, d);
                }
            }
            EntityMention {
                span,
                entity_id,
                mutation,
            }
        })
        .collect();

    rep.count("mentions", mentions.len());
    rep.count("normalized", mentions.iter().filter(|m| m.entity_id.is_some()).count());
    rep.count("mutations_normalized", mentions.iter().filter(|m| m.mutation.is_some()).count());
    for ty in EntityType::ALL {
        let n = mentions.iter().filter(|m| m.span.entity_type == ty).count();
        rep.count(&format!("mentions_{ty}"), n);
    }

    let stats_path = layout.work("dictionary_stats.csv");
    let mut w = create(&stats_path)?;
    let io = io_err(&stats_path);
    writeln!(w, "type,id_count,name_count,avg_names_per_id").map_err(&io)?;
    for d in dicts.iter() {
        let s = d.stats();
        writeln!(w, "{},{},{},{}", d.entity_type, s.id_count, s.name_count, s.avg_as_f64()).map_err(&io)?;
        rep.count(&format!("dictionary_{}_ids", d.entity_type), s.id_count);
        rep.count(&format!("dictionary_{}_names", d.entity_type), s.name_count);
    }
    w.flush().map_err(&io)?;
    write_jsonl(&layout.work(MENTIONS), &mentions)?;
    Ok(())
}

fn and_merge(cfg: &PipelineConfig, layout: &Layout, rep: &mut StageReport) -> Result<(), Error> {
    let citations = load_citations(layout)?;
    let primary_path = require("primary_clustering", cfg.inputs.primary_clustering.as_deref())?;
    let secondary_path = require("secondary_clustering", cfg.inputs.secondary_clustering.as_deref())?;
    let mut primary = load_clustering(primary_path, "primary")?;
    primary.coverage_end_year = Some(cfg.primary_coverage_end_year);
    let secondary = load_clustering(secondary_path, "secondary")?;

    let mut unified = merge_clusterings(&primary, &secondary);
    unified.cover(citations.iter().flat_map(|c| c.authors.iter().map(|a| a.key())));
    let m = validate_merge(&unified, &primary, &secondary)?;

    let years: HashMap<u64, Option<i32>> = citations.iter().map(|c| (c.article.pmid, c.article.pub_year)).collect();
    let late = primary
        .assignments
        .keys()
        .filter(|k| years.get(&k.pmid).copied().flatten().is_some_and(|y| y > cfg.primary_coverage_end_year))
        .count();
    if late > 0 {
        rep.warn(format!(
            "{late} primary-source instances fall on articles after its coverage end year {}",
            cfg.primary_coverage_end_year
        ));
    }
    if !unified.conflict_log.is_empty() {
        rep.warn(format!("{} secondary clusters span several primary IDs", unified.conflict_log.len()));
    }
    rep.count("primary_instances", primary.len());
    rep.count("secondary_instances", secondary.len());
    rep.count("step1_instances", m.step1_instances);
    rep.count("step2_instances", m.step2_instances);
    rep.count("step2_clusters", m.step2_clusters);
    rep.count("step3_instances", m.step3_instances);
    rep.count("zero_instances", m.zero_instances);
    rep.count("conflicts", m.conflicts);
    rep.count("fresh_id_floor", unified.fresh_id_floor);

    let path = layout.work(UNIFIED);
    let mut w = create(&path)?;
    write_unified(&mut w, &unified).and_then(|_| w.flush()).map_err(io_err(&path))?;
    let path = layout.work("conflicts.csv");
    let mut w = create(&path)?;
    write_conflicts(&mut w, &unified.conflict_log).and_then(|_| w.flush()).map_err(io_err(&path))?;
    Ok(())
}

#[derive(Serialize, Deserialize)]
struct LinkedOrcid {
    and_id: u64,
    record: OrcidRecord,
}

fn link(cfg: &PipelineConfig, layout: &Layout, rep: &mut StageReport) -> Result<(), Error> {
    let citations = load_citations(layout)?;
    let and_ids = load_and_ids(layout)?;
    let corpus = Corpus::new(&citations, &and_ids);
    let inputs = &cfg.inputs;
    let mut links = Vec::new();

    let projects = optional("exporter_projects", inputs.exporter_projects.as_deref())?;
    let pubs = optional("exporter_pubs", inputs.exporter_pubs.as_deref())?;
    let (nih_rows, crosswalk, funnel) = match (projects, pubs) {
        (Some(pp), Some(pb)) => {
            let projects = assemble_nih_projects(
                load_tabular(pp, SchemaName::ExporterProjects)?,
                load_tabular(pb, SchemaName::ExporterPubs)?,
            );
            let nih = link_nih(&projects, &corpus);
            let build = build_eval_crosswalk(&projects, &corpus);
            rep.count("nih_pi_links", nih.links.len());
            rep.count("nih_unresolved_pis", nih.unresolved_pis.len());
            links.extend(nih.links);
            (nih.rows, build.crosswalk, build.funnel)
        }
        _ => {
            rep.warn("ExPORTER inputs not configured; NIH linkage skipped");
            (Vec::new(), Crosswalk::new(), NihFunnel::default())
        }
    };
    rep.count("nih_rows", nih_rows.len());
    rep.count("crosswalk_triples", crosswalk.len());
    for (stage, n) in funnel.stages() {
        rep.count(&format!("funnel_{stage}"), n);
    }

    let mut linked: Vec<LinkedOrcid> = Vec::new();
    if let Some(person) = optional("orcid_person", inputs.orcid_person.as_deref())? {
        let rows = |what: &str, p: Option<&Path>, schema| -> Result<Vec<OrcidAffiliationRow>, Error> {
            Ok(match optional(what, p)? {
                Some(p) => load_tabular(p, schema)?,
                None => Vec::new(),
            })
        };
        let works = match optional("orcid_works", inputs.orcid_works.as_deref())? {
            Some(p) => load_tabular(p, SchemaName::OrcidWorks)?,
            None => Vec::new(),
        };
        let asm = assemble_orcid_records(
            load_tabular(person, SchemaName::OrcidPerson)?,
            works,
            rows("orcid_employment", inputs.orcid_employment.as_deref(), SchemaName::OrcidEmployment)?,
            rows("orcid_education", inputs.orcid_education.as_deref(), SchemaName::OrcidEducation)?,
        );
        if !asm.invalid_ids.is_empty() {
            rep.warn(format!("{} ORCID iDs failed the checksum and were skipped", asm.invalid_ids.len()));
        }
        let out = link_orcid(&corpus, &asm.records);
        rep.count("orcid_records", asm.records.len());
        rep.count("orcid_invalid_ids", asm.invalid_ids.len());
        rep.count("orcid_orphan_rows", asm.orphan_rows);
        rep.count("orcid_implausible_years", asm.implausible_years);
        rep.count("orcid_links", out.links.len());
        rep.count("orcid_ambiguous_pairs", out.ambiguities.len());
        let by_id: HashMap<&str, &OrcidRecord> = asm.records.iter().map(|r| (r.orcid_id.as_str(), r)).collect();
        linked = out
            .links
            .iter()
            .map(|l| LinkedOrcid {
                and_id: l.and_id,
                record: by_id[l.counterpart_id.as_str()].clone(),
            })
            .collect();
        let path = layout.work("orcid_ambiguities.csv");
        let mut w = create(&path)?;
        let io = io_err(&path);
        writeln!(w, "and_id,orcid,orcids_for_and_id,and_ids_for_orcid").map_err(&io)?;
        for a in &out.ambiguities {
            writeln!(w, "{},{},{},{}", a.and_id, a.orcid_id, a.orcids_for_and_id, a.and_ids_for_orcid).map_err(&io)?;
        }
        w.flush().map_err(&io)?;
        let mut all = out.links;
        all.append(&mut links);
        links = all;
    } else {
        rep.warn("ORCID inputs not configured; ORCID linkage skipped");
    }

    write_jsonl(&layout.work(NIH_ROWS), &nih_rows)?;
    write_jsonl(&layout.work(ORCID_LINKED), &linked)?;
    let path = layout.work(CROSSWALK);
    let w = create(&path)?;
    write_crosswalk(w, &crosswalk).map_err(|e| Error::Io {
        path: path.clone(),
        source: std::io::Error::other(e),
    })?;
    let path = layout.work(NIH_FUNNEL);
    let mut w = create(&path)?;
    serde_json::to_writer_pretty(&mut w, &funnel).expect("funnel serializes");
    writeln!(w).and_then(|_| w.flush()).map_err(io_err(&path))?;
    let path = layout.work("links.csv");
    let mut w = create(&path)?;
    write_links(&mut w, &links).and_then(|_| w.flush()).map_err(io_err(&path))?;
    Ok(())
}

fn affil(cfg: &PipelineConfig, layout: &Layout, rep: &mut StageReport) -> Result<(), Error> {
    let citations = load_citations(layout)?;
    let and_ids = load_and_ids(layout)?;
    let tables = match optional("affiliation_tables", cfg.inputs.affiliation_tables.as_deref())? {
        Some(dir) => KeywordTables::load_dir(dir)?,
        None => KeywordTables::builtin(),
    };
    let gazetteer = match optional("gazetteer", cfg.inputs.gazetteer.as_deref())? {
        Some(p) => Gazetteer::load(p, &tables.countries)?,
        None => {
            rep.warn("no gazetteer configured; coordinates left empty");
            Gazetteer::default()
        }
    };
    let parser = AffiliationParser::new(tables, gazetteer);

    let parsed: Vec<(ParsedAffiliation, Option<GeocodeOutcome>)> = citations
        .par_iter()
        .flat_map_iter(|c| {
            let parser = &parser;
            let and_ids = &and_ids;
            c.authors.iter().flat_map(move |a| {
                let and_id = Some(and_ids.get(&a.key()).copied().unwrap_or(0));
                let base = ParsedAffiliation {
                    pmid: a.pmid,
                    au_order: a.au_order,
                    and_id,
                    affiliation_order: 1,
                    pub_year: c.article.pub_year,
                    raw: String::new(),
                    fields: Default::default(),
                    inherited: false,
                };
                if a.affiliation_strings.is_empty() {
                    return vec![(base, None)];
                }
                a.affiliation_strings
                    .iter()
                    .enumerate()
                    .map(|(i, raw)| {
                        let mut fields = parser.parse(raw);
                        let outcome = geocode(&mut fields, parser.gazetteer());
                        let rec = ParsedAffiliation {
                            affiliation_order: i as u32 + 1,
                            raw: raw.clone(),
                            fields,
                            ..base.clone()
                        };
                        (rec, Some(outcome))
                    })
                    .collect()
            })
        })
        .collect();

    let mut stats = GeocodeStats::default();
    let mut records = Vec::with_capacity(parsed.len());
    for (r, o) in parsed {
        if let Some(o) = o {
            stats.record(o);
        }
        records.push(r);
    }
    let strings = records.iter().filter(|r| !r.raw.is_empty()).count();
    let inh = inherit_affiliations(&mut records, cfg.cutoff_year);
    rep.count("affiliation_strings", strings);
    rep.count("records", records.len());
    rep.count("instances", inh.instances);
    rep.count("covered_before", inh.covered_before);
    rep.count("covered_after", inh.covered_after);
    rep.count("coverage_before", inh.coverage_before());
    rep.count("coverage_after", inh.coverage_after());
    rep.count("inherited_instances", inh.inherited_instances);
    rep.count("cutoff_year", cfg.cutoff_year);
    for (name, o) in [
        ("geocode_exact", GeocodeOutcome::Exact),
        ("geocode_city_country", GeocodeOutcome::CityCountry),
        ("geocode_ambiguous", GeocodeOutcome::Ambiguous),
        ("geocode_not_found", GeocodeOutcome::NotFound),
        ("geocode_no_city", GeocodeOutcome::NoCity),
    ] {
        rep.count(name, stats.get(o));
    }
    write_jsonl(&layout.work(AFFILIATIONS), &records)?;
    Ok(())
}

fn emit_file<'a, R: TableRow + 'a>(
    layout: &Layout,
    rows: impl IntoIterator<Item = &'a R>,
    rep: &mut StageReport,
) -> Result<(), Error> {
    let path = layout.table(&R::SCHEMA.file_name());
    let w = create(&path)?;
    let n = emit_rows(w, rows)?;
    rep.count(&format!("rows_{}", R::SCHEMA.name), n);
    Ok(())
}

fn emit(layout: &Layout, rep: &mut StageReport) -> Result<(), Error> {
    let citations = load_citations(layout)?;
    let and_ids = load_and_ids(layout)?;
    let authors = derive_author_list_fields(&citations, &and_ids);
    let mentions: Vec<EntityMention> = read_jsonl(&layout.work(MENTIONS), "mention intermediate (run `normalize` first)")?;
    let (main, mutation) = entity_rows(&mentions);
    let affs: Vec<ParsedAffiliation> =
        read_jsonl(&layout.work(AFFILIATIONS), "affiliation intermediate (run `affil` first)")?;
    let linked: Vec<LinkedOrcid> = read_jsonl(&layout.work(ORCID_LINKED), "ORCID links (run `link` first)")?;
    let pairs: Vec<(u64, &OrcidRecord)> = linked.iter().map(|l| (l.and_id, &l.record)).collect();
    let (emp, edu) = researcher_rows(&pairs);
    let nih: Vec<NihProjectRow> = read_jsonl(&layout.work(NIH_ROWS), "NIH rows (run `link` first)")?;

    emit_file(layout, &authors, rep)?;
    emit_file(layout, &main, rep)?;
    emit_file(layout, &mutation, rep)?;
    emit_file(layout, affiliation_rows(&affs), rep)?;
    emit_file(layout, &emp, rep)?;
    emit_file(layout, &edu, rep)?;
    emit_file(layout, &nih, rep)?;
    let instances: usize = citations.iter().map(|c| c.authors.len()).sum();
    rep.count("author_instances", instances);
    Ok(())
}

fn graph(layout: &Layout, rep: &mut StageReport) -> Result<(), Error> {
    let citations = load_citations(layout)?;
    let and_ids = load_and_ids(layout)?;
    let authors = derive_author_list_fields(&citations, &and_ids);
    let mentions: Vec<EntityMention> = read_jsonl(&layout.work(MENTIONS), "mention intermediate (run `normalize` first)")?;
    let g = build_bipartite(&authors, &mentions);
    let pa = project_authors(&g);
    let pe = project_entities(&g);
    rep.count("authors", g.authors().len());
    rep.count("entities", g.entities().len());
    rep.count("edges", g.edge_count());
    rep.count("author_projection_edges", pa.edges.len());
    rep.count("entity_projection_edges", pe.edges.len());
    write_graph(layout, "bipartite.csv", |w| g.write_edge_list(w))?;
    write_graph(layout, "author_projection.csv", |w| pa.write_edge_list(w))?;
    write_graph(layout, "entity_projection.csv", |w| pe.write_edge_list(w))?;
    Ok(())
}

fn write_graph(
    layout: &Layout,
    name: &str,
    f: impl FnOnce(&mut dyn Write) -> std::io::Result<()>,
) -> Result<(), Error> {
    let path = layout.graph(name);
    let mut w = create(&path)?;
    f(&mut w).and_then(|_| w.flush()).map_err(io_err(&path))
}

fn eval(cfg: &PipelineConfig, layout: &Layout, rep: &mut StageReport) -> Result<(), Error> {
    let (path, configured) = match cfg.inputs.crosswalk.as_deref() {
        Some(p) => (require("crosswalk", Some(p))?.to_path_buf(), true),
        None => (layout.work(CROSSWALK), false),
    };
    let crosswalk = read_crosswalk(open(&path, "crosswalk (run `link` first)")?).map_err(|e| Error::Intermediate {
        path: path.clone(),
        line: e.position().map_or(0, |p| p.line() as usize),
        message: e.to_string(),
    })?;
    let nih_configured = cfg.inputs.exporter_projects.is_some() && cfg.inputs.exporter_pubs.is_some();
    if crosswalk.is_empty() && !configured && !nih_configured {
        rep.warn("no crosswalk available; evaluation skipped");
        return Ok(());
    }
    let mut report = evaluate(&crosswalk, cfg.averaging)?;
    let funnel_path = layout.work(NIH_FUNNEL);
    if !configured && funnel_path.exists() {
        let text = std::fs::read_to_string(&funnel_path).map_err(io_err(&funnel_path))?;
        let funnel: NihFunnel = serde_json::from_str(&text).map_err(|e| Error::Intermediate {
            path: funnel_path.clone(),
            line: e.line(),
            message: e.to_string(),
        })?;
        report.funnel = funnel.stages();
    }
    rep.count("triples", crosswalk.len());
    rep.count("precision", report.precision);
    rep.count("recall", report.recall);
    rep.count("f1", report.f1);
    rep.count("modal_ties", report.modal_ties);
    if report.modal_ties > 0 {
        rep.warn(format!("{} modal ties broken toward the smaller ID", report.modal_ties));
    }
    let p = layout.eval("report.csv");
    let mut w = create(&p)?;
    report.write_csv(&mut w).and_then(|_| w.flush()).map_err(io_err(&p))?;
    let p = layout.eval("contributions.csv");
    let mut w = create(&p)?;
    report.write_contributions_csv(&mut w).and_then(|_| w.flush()).map_err(io_err(&p))?;
    let p = layout.eval("report.txt");
    std::fs::write(&p, report.render_text()).map_err(io_err(&p))?;
    Ok(())
}
