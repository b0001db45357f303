//! Streaming reader for MEDLINE/PubMed citation XML.
//!
//! Only the element subset needed downstream is interpreted: PMID,
//! ArticleTitle, Journal/Title, PubDate (Year or MedlineDate), the author
//! list, DOI ELocationIDs and AbstractText. Everything else is skipped.
//! Memory use is bounded by the largest single citation.

use std::io::BufRead;

use quick_xml::events::{BytesStart, Event};
use quick_xml::Reader;

use super::{ArticleRecord, AuthorInstance, Citation, IngestError};
use crate::text::{clean, decode_lossy};

const MIN_YEAR: i32 = 1700;
const MAX_YEAR: i32 = 2100;

/// Counters accumulated while parsing one stream.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ParseReport {
    pub citations: usize,
    pub author_instances: usize,
    pub skipped_missing_pmid: usize,
    pub invalid_utf8_sequences: usize,
    pub years_missing: usize,
    pub years_out_of_range: usize,
    pub collective_authors: usize,
}

/// Iterator over the citations of one XML stream.
pub fn parse_citation_xml<R: BufRead>(stream: R) -> CitationReader<R> {
    CitationReader::new(stream)
}

pub struct CitationReader<R: BufRead> {
    reader: Reader<R>,
    buf: Vec<u8>,
    report: ParseReport,
    done: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Field {
    Pmid,
    Title,
    Journal,
    Year,
    MedlineDate,
    AbstractText,
    LastName,
    ForeName,
    Initials,
    Suffix,
    CollectiveName,
    Affiliation,
    Doi,
}

#[derive(Default)]
struct AuthorDraft {
    last_name: Option<String>,
    fore_name: Option<String>,
    initials: Option<String>,
    suffix: Option<String>,
    collective: bool,
    affiliations: Vec<String>,
}

#[derive(Default)]
struct CitationDraft {
    path: Vec<Vec<u8>>,
    capture: Option<(Field, usize)>,
    text: String,
    pmid: Option<String>,
    title: String,
    journal: String,
    year: Option<String>,
    medline_date: Option<String>,
    doi: Option<String>,
    abstract_sections: Vec<String>,
    authors: Vec<AuthorDraft>,
}

impl CitationDraft {
    fn parent_is(&self, name: &[u8]) -> bool {
        self.path.len() >= 2 && self.path[self.path.len() - 2] == name
    }

    fn within(&self, name: &[u8]) -> bool {
        self.path.iter().any(|p| p == name)
    }

    fn open(&mut self, start: &BytesStart<'_>) {
        let name = start.local_name().as_ref().to_vec();
        self.path.push(name);
        if self.capture.is_some() {
            return;
        }
        let depth = self.path.len();
        let name = self.path[depth - 1].as_slice();
        let field = match name {
            b"PMID" if self.parent_is(b"MedlineCitation") && self.pmid.is_none() => {
                Some(Field::Pmid)
            }
            b"ArticleTitle" if self.parent_is(b"Article") => Some(Field::Title),
            b"Title" if self.parent_is(b"Journal") => Some(Field::Journal),
            b"Year" if self.parent_is(b"PubDate") => Some(Field::Year),
            b"MedlineDate" if self.parent_is(b"PubDate") => Some(Field::MedlineDate),
            b"AbstractText" if self.parent_is(b"Abstract") => Some(Field::AbstractText),
            b"Author" if self.parent_is(b"AuthorList") => {
                self.authors.push(AuthorDraft::default());
                None
            }
            b"LastName" if self.parent_is(b"Author") => Some(Field::LastName),
            b"ForeName" if self.parent_is(b"Author") => Some(Field::ForeName),
            b"Initials" if self.parent_is(b"Author") => Some(Field::Initials),
            b"Suffix" if self.parent_is(b"Author") => Some(Field::Suffix),
            b"CollectiveName" if self.parent_is(b"Author") => Some(Field::CollectiveName),
            b"Affiliation" if self.parent_is(b"AffiliationInfo") && self.within(b"Author") => {
                Some(Field::Affiliation)
            }
            b"ELocationID" if self.doi.is_none() && is_doi_location(start) => Some(Field::Doi),
            _ => None,
        };
        if let Some(field) = field {
            self.capture = Some((field, depth));
            self.text.clear();
        }
    }

    fn close(&mut self) {
        let depth = self.path.len();
        if let Some((field, at)) = self.capture {
            if at == depth {
                self.capture = None;
                let value = clean(&self.text);
                self.commit(field, value);
            }
        }
        self.path.pop();
    }

    fn commit(&mut self, field: Field, value: String) {
        let non_empty = (!value.is_empty()).then_some(value);
        match field {
            Field::Pmid => self.pmid = non_empty,
            Field::Title => self.title = non_empty.unwrap_or_default(),
            Field::Journal => self.journal = non_empty.unwrap_or_default(),
            Field::Year => self.year = non_empty,
            Field::MedlineDate => self.medline_date = non_empty,
            Field::Doi => self.doi = non_empty,
            Field::AbstractText => {
                if let Some(v) = non_empty {
                    self.abstract_sections.push(v);
                }
            }
            _ => {
                let Some(author) = self.authors.last_mut() else {
                    return;
                };
                match field {
                    Field::LastName => author.last_name = non_empty,
                    Field::ForeName => author.fore_name = non_empty,
                    Field::Initials => author.initials = non_empty,
                    Field::Suffix => author.suffix = non_empty,
                    Field::CollectiveName => author.collective = true,
                    Field::Affiliation => author.affiliations.extend(non_empty),
                    _ => unreachable!(),
                }
            }
        }
    }

    fn finish(self, report: &mut ParseReport) -> Option<Citation> {
        let pmid = match self.pmid.as_deref().map(str::parse::<u64>) {
            Some(Ok(p)) if p > 0 => p,
            _ => {
                report.skipped_missing_pmid += 1;
                return None;
            }
        };
        let pub_year = self
            .year
            .as_deref()
            .and_then(|y| y.parse::<i32>().ok())
            .or_else(|| self.medline_date.as_deref().and_then(leading_year));
        match pub_year {
            None => report.years_missing += 1,
            Some(y) if !(MIN_YEAR..=MAX_YEAR).contains(&y) => report.years_out_of_range += 1,
            _ => {}
        }
        let abstract_text =
            (!self.abstract_sections.is_empty()).then(|| self.abstract_sections.join(" "));
        let authors: Vec<AuthorInstance> = self
            .authors
            .into_iter()
            .enumerate()
            .map(|(i, a)| {
                // Group entries keep an empty name so they never match a person.
                let (last_name, fore_name, initials, suffix) = if a.collective || a.last_name.is_none() {
                    report.collective_authors += 1;
                    (None, None, None, None)
                } else {
                    (a.last_name, a.fore_name, a.initials, a.suffix)
                };
                AuthorInstance {
                    pmid,
                    au_order: i as u32 + 1,
                    last_name,
                    fore_name,
                    initials,
                    suffix,
                    affiliation_strings: a.affiliations,
                }
            })
            .collect();
        report.citations += 1;
        report.author_instances += authors.len();
        Some(Citation {
            article: ArticleRecord {
                pmid,
                pub_year,
                journal: self.journal,
                title: self.title,
                doi: self.doi,
                abstract_text,
            },
            authors,
        })
    }
}

fn is_doi_location(start: &BytesStart<'_>) -> bool {
    start
        .attributes()
        .flatten()
        .any(|a| a.key.local_name().as_ref() == b"EIdType" && a.value.eq_ignore_ascii_case(b"doi"))
}

/// First run of four ASCII digits, e.g. `"1998 Dec-1999 Jan"` gives 1998.
fn leading_year(s: &str) -> Option<i32> {
    let bytes = s.as_bytes();
    bytes
        .windows(4)
        .enumerate()
        .find(|(i, w)| {
            w.iter().all(u8::is_ascii_digit)
                && (*i == 0 || !bytes[i - 1].is_ascii_digit())
                && bytes.get(i + 4).is_none_or(|b| !b.is_ascii_digit())
        })
        .and_then(|(_, w)| std::str::from_utf8(w).ok()?.parse().ok())
}

fn is_citation_root(name: &[u8]) -> bool {
    name == b"PubmedArticle" || name == b"MedlineCitation"
}

impl<R: BufRead> CitationReader<R> {
    pub fn new(stream: R) -> Self {
        let mut reader = Reader::from_reader(stream);
        reader.config_mut().expand_empty_elements = true;
        Self {
            reader,
            buf: Vec::with_capacity(4096),
            report: ParseReport::default(),
            done: false,
        }
    }

    pub fn report(&self) -> &ParseReport {
        &self.report
    }

    /// Capacity of the internal event buffer; grows only with the largest
    /// single element, never with the number of citations.
    pub fn buffer_capacity(&self) -> usize {
        self.buf.capacity()
    }

    fn xml_error(&self, err: impl std::fmt::Display) -> IngestError {
        IngestError::Xml {
            offset: self.reader.error_position(),
            message: err.to_string(),
        }
    }

    fn read_citation(&mut self) -> Result<Option<Citation>, IngestError> {
        let mut draft: Option<CitationDraft> = None;
        loop {
            self.buf.clear();
            let event = match self.reader.read_event_into(&mut self.buf) {
                Ok(ev) => ev,
                Err(e) => {
                    let err = self.xml_error(e);
                    return Err(err);
                }
            };
            match event {
                Event::Start(start) => match draft.as_mut() {
                    Some(d) => d.open(&start),
                    None if is_citation_root(start.local_name().as_ref()) => {
                        let mut d = CitationDraft::default();
                        d.open(&start);
                        draft = Some(d);
                    }
                    None => {}
                },
                Event::End(_) => {
                    if let Some(d) = draft.as_mut() {
                        d.close();
                        if d.path.is_empty() {
                            let finished = draft.take().and_then(|d| d.finish(&mut self.report));
                            if finished.is_some() {
                                return Ok(finished);
                            }
                        }
                    }
                }
                Event::Text(text) => {
                    if let Some(d) = draft.as_mut().filter(|d| d.capture.is_some()) {
                        let (decoded, bad) = decode_lossy(&text);
                        self.report.invalid_utf8_sequences += bad;
                        match quick_xml::escape::unescape(&decoded) {
                            Ok(s) => d.text.push_str(&s),
                            Err(e) => {
                                return Err(IngestError::Xml {
                                    offset: self.reader.buffer_position(),
                                    message: e.to_string(),
                                })
                            }
                        }
                    }
                }
                Event::CData(data) => {
                    if let Some(d) = draft.as_mut().filter(|d| d.capture.is_some()) {
                        let (decoded, bad) = decode_lossy(&data);
                        self.report.invalid_utf8_sequences += bad;
                        d.text.push_str(&decoded);
                    }
                }
                Event::Eof => {
                    if draft.is_some() {
                        return Err(IngestError::Xml {
                            offset: self.reader.buffer_position(),
                            message: "unexpected end of input inside a citation".into(),
                        });
                    }
                    return Ok(None);
                }
                _ => {}
            }
        }
    }
}

impl<R: BufRead> Iterator for CitationReader<R> {
    type Item = Result<Citation, IngestError>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.done {
            return None;
        }
        match self.read_citation() {
            Ok(Some(c)) => Some(Ok(c)),
            Ok(None) => {
                self.done = true;
                None
            }
            Err(e) => {
                self.done = true;
                Some(Err(e))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const ONE: &str = r#"<?xml version="1.0"?>
<PubmedArticleSet>
 <PubmedArticle>
  <MedlineCitation Status="MEDLINE">
   <PMID Version="1">101</PMID>
   <Article>
    <Journal><JournalIssue><PubDate><Year>2012</Year></PubDate></JournalIssue>
      <Title>Journal of Tests</Title></Journal>
    <ArticleTitle>BRAF <i>V600E</i> in melanoma &amp; more.</ArticleTitle>
    <ELocationID EIdType="pii">S0001</ELocationID>
    <ELocationID EIdType="doi" ValidYN="Y">10.1000/xyz.1</ELocationID>
    <Abstract>
      <AbstractText Label="BACKGROUND">First part.</AbstractText>
      <AbstractText Label="RESULTS">Second part.</AbstractText>
    </Abstract>
    <AuthorList CompleteYN="Y">
     <Author><LastName>Pietranico</LastName><ForeName>Rosa</ForeName><Initials>R</Initials>
       <AffiliationInfo><Affiliation>Dept. of Biology, Example University, Boston, MA, USA.</Affiliation></AffiliationInfo>
     </Author>
     <Author><LastName>Maneksha</LastName><ForeName>S</ForeName><Initials>S</Initials><Suffix>Jr</Suffix></Author>
     <Author><CollectiveName>The Test Consortium</CollectiveName></Author>
    </AuthorList>
   </Article>
   <CommentsCorrectionsList><CommentsCorrections><PMID>999</PMID></CommentsCorrections></CommentsCorrectionsList>
  </MedlineCitation>
 </PubmedArticle>
</PubmedArticleSet>"#;

    fn parse_all(xml: &[u8]) -> (Vec<Citation>, ParseReport) {
        let mut reader = parse_citation_xml(xml);
        let out: Vec<_> = reader.by_ref().map(Result::unwrap).collect();
        (out, reader.report().clone())
    }

    #[test]
    fn parses_single_citation() {
        let (cits, report) = parse_all(ONE.as_bytes());
        assert_eq!(cits.len(), 1);
        let c = &cits[0];
        assert_eq!(c.article.pmid, 101);
        assert_eq!(c.article.pub_year, Some(2012));
        assert_eq!(c.article.journal, "Journal of Tests");
        assert_eq!(c.article.title, "BRAF V600E in melanoma & more.");
        assert_eq!(c.article.doi.as_deref(), Some("10.1000/xyz.1"));
        assert_eq!(c.article.abstract_text.as_deref(), Some("First part. Second part."));
        let orders: Vec<u32> = c.authors.iter().map(|a| a.au_order).collect();
        assert_eq!(orders, [1, 2, 3]);
        assert_eq!(c.authors[0].affiliation_strings.len(), 1);
        assert_eq!(c.authors[1].suffix.as_deref(), Some("Jr"));
        assert!(c.authors[2].is_collective());
        assert_eq!(report.collective_authors, 1);
        assert_eq!(report.author_instances, 3);
    }

    #[test]
    fn missing_abstract_is_not_an_error() {
        let xml = "<PubmedArticleSet><PubmedArticle><MedlineCitation><PMID>7</PMID>\
                   <Article><ArticleTitle>T</ArticleTitle></Article></MedlineCitation></PubmedArticle></PubmedArticleSet>";
        let (cits, _) = parse_all(xml.as_bytes());
        assert_eq!(cits[0].article.abstract_text, None);
        assert!(cits[0].authors.is_empty());
    }

    #[test]
    fn missing_pmid_is_skipped_and_counted() {
        let xml = "<PubmedArticleSet><PubmedArticle><MedlineCitation><Article/></MedlineCitation></PubmedArticle>\
                   <PubmedArticle><MedlineCitation><PMID>8</PMID></MedlineCitation></PubmedArticle></PubmedArticleSet>";
        let (cits, report) = parse_all(xml.as_bytes());
        assert_eq!(cits.len(), 1);
        assert_eq!(cits[0].article.pmid, 8);
        assert_eq!(report.skipped_missing_pmid, 1);
    }

    #[test]
    fn medline_date_fallback() {
        let xml = "<MedlineCitationSet><MedlineCitation><PMID>9</PMID><Article><Journal><JournalIssue>\
                   <PubDate><MedlineDate>1998 Dec-1999 Jan</MedlineDate></PubDate></JournalIssue></Journal>\
                   </Article></MedlineCitation></MedlineCitationSet>";
        let (cits, _) = parse_all(xml.as_bytes());
        assert_eq!(cits[0].article.pub_year, Some(1998));
        assert_eq!(leading_year("Winter 2001-2002"), Some(2001));
        assert_eq!(leading_year("12345"), None);
        assert_eq!(leading_year("Spring"), None);
    }

    #[test]
    fn malformed_xml_reports_offset() {
        let xml = "<PubmedArticleSet><PubmedArticle><MedlineCitation><PMID>1</PMID></Oops></PubmedArticle>";
        let mut reader = parse_citation_xml(xml.as_bytes());
        match reader.next() {
            Some(Err(IngestError::Xml { offset, .. })) => assert!(offset > 0),
            other => panic!("expected xml error, got {other:?}"),
        }
        assert!(reader.next().is_none());
    }

    #[test]
    fn truncated_citation_is_an_error() {
        let xml = "<PubmedArticleSet><PubmedArticle><MedlineCitation><PMID>1</PMID>";
        let mut reader = parse_citation_xml(xml.as_bytes());
        assert!(matches!(reader.next(), Some(Err(IngestError::Xml { .. }))));
    }

    #[test]
    fn invalid_utf8_is_replaced_and_counted() {
        let mut xml = b"<PubmedArticleSet><PubmedArticle><MedlineCitation><PMID>3</PMID><Article><ArticleTitle>Bad ".to_vec();
        xml.extend_from_slice(b"\xff byte</ArticleTitle></Article></MedlineCitation></PubmedArticle></PubmedArticleSet>");
        let (cits, report) = parse_all(&xml);
        assert_eq!(cits[0].article.title, "Bad \u{FFFD} byte");
        assert_eq!(report.invalid_utf8_sequences, 1);
    }

    #[test]
    fn text_is_nfc_normalized() {
        let xml = "<PubmedArticleSet><PubmedArticle><MedlineCitation><PMID>4</PMID><Article><AuthorList>\
                   <Author><LastName>  Mu\u{308}ller </LastName></Author></AuthorList></Article>\
                   </MedlineCitation></PubmedArticle></PubmedArticleSet>";
        let (cits, _) = parse_all(xml.as_bytes());
        assert_eq!(cits[0].authors[0].last_name.as_deref(), Some("M\u{fc}ller"));
    }
}
