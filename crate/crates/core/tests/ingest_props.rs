use std::time::Instant;

use proptest::prelude::*;
use pubkg::ingest::parse_citation_xml;
use pubkg::synth::{citation_xml, SynthParams};

fn params(papers: usize, seed: u64) -> SynthParams {
    SynthParams {
        papers,
        seed,
        ..Default::default()
    }
}

#[test]
fn ten_thousand_citations_match_raw_counts() {
    let xml = citation_xml(&params(10_000, 11));
    let expected_authors = xml.matches("<Author ").count();
    let expected_citations = xml.matches("<PubmedArticle>").count();
    let t = Instant::now();
    let mut reader = parse_citation_xml(xml.as_bytes());
    let mut citations = 0;
    let mut authors = 0;
    let mut peak = 0;
    while let Some(c) = reader.next() {
        let c = c.unwrap();
        citations += 1;
        authors += c.authors.len();
        peak = peak.max(reader.buffer_capacity());
    }
    let elapsed = t.elapsed();
    assert_eq!(citations, expected_citations);
    assert_eq!(authors, expected_authors);
    assert_eq!(reader.report().author_instances, expected_authors);
    // the largest single element here is far below 64 KiB
    assert!(peak <= 64 * 1024, "buffer grew to {peak}");
    eprintln!("parsed {citations} citations in {elapsed:?}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn parse_counts_match_source(papers in 0usize..60, seed in any::<u64>()) {
        let xml = citation_xml(&params(papers, seed));
        let cits: Vec<_> = parse_citation_xml(xml.as_bytes()).map(Result::unwrap).collect();
        prop_assert_eq!(cits.len(), papers);
        let authors: usize = cits.iter().map(|c| c.authors.len()).sum();
        prop_assert_eq!(authors, xml.matches("<Author ").count());
        for c in &cits {
            let orders: Vec<u32> = c.authors.iter().map(|a| a.au_order).collect();
            let expected: Vec<u32> = (1..=c.authors.len() as u32).collect();
            prop_assert_eq!(orders, expected);
            prop_assert!(c.article.pub_year.is_some());
        }
    }

    #[test]
    fn chunked_reads_give_identical_results(papers in 1usize..20, seed in any::<u64>(), chunk in 1usize..64) {
        let xml = citation_xml(&params(papers, seed));
        let whole: Vec<_> = parse_citation_xml(xml.as_bytes()).map(Result::unwrap).collect();
        let slow = std::io::BufReader::with_capacity(chunk, xml.as_bytes());
        let chunked: Vec<_> = parse_citation_xml(slow).map(Result::unwrap).collect();
        prop_assert_eq!(whole, chunked);
    }
}
