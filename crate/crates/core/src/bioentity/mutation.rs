//! Rule-based mutation normalization.
//!
//! Recognized forms:
//! - protein substitution, one- or three-letter codes: `V600E`, `p.Val600Glu` → `p.V600E`
//! - protein frameshift: `p.L858fs*3`, `Leu858fs` → `p.L858fs`
//! - DNA substitution: `c.76A>T` (bases upper-cased)
//! - dbSNP identifiers: `rs113488022`
//! - deletions, duplications and insertions at DNA or protein level (`Other`)

use std::sync::LazyLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MutationType {
    DNASubstitution,
    ProteinSubstitution,
    Frameshift,
    DbSNP,
    Other,
}

impl MutationType {
    pub fn as_str(self) -> &'static str {
        match self {
            MutationType::DNASubstitution => "DNASubstitution",
            MutationType::ProteinSubstitution => "ProteinSubstitution",
            MutationType::Frameshift => "Frameshift",
            MutationType::DbSNP => "DbSNP",
            MutationType::Other => "Other",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MutationNorm {
    pub mention: String,
    pub mutation_type: MutationType,
    pub normalized_name: String,
}

const AMINO_ACIDS: [(&str, char); 22] = [
    ("Ala", 'A'),
    ("Arg", 'R'),
    ("Asn", 'N'),
    ("Asp", 'D'),
    ("Cys", 'C'),
    ("Gln", 'Q'),
    ("Glu", 'E'),
    ("Gly", 'G'),
    ("His", 'H'),
    ("Ile", 'I'),
    ("Leu", 'L'),
    ("Lys", 'K'),
    ("Met", 'M'),
    ("Phe", 'F'),
    ("Pro", 'P'),
    ("Ser", 'S'),
    ("Thr", 'T'),
    ("Trp", 'W'),
    ("Tyr", 'Y'),
    ("Val", 'V'),
    ("Ter", '*'),
    ("Xaa", 'X'),
];

const AA3: &str = "Ala|Arg|Asn|Asp|Cys|Gln|Glu|Gly|His|Ile|Leu|Lys|Met|Phe|Pro|Ser|Thr|Trp|Tyr|Val";
const AA1: &str = "[ACDEFGHIKLMNPQRSTVWY]";

static DBSNP: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"^(?i:rs)(\d+)$").unwrap());
static DNA_SUB: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r"^([cgmn])\.([-*]?\d+(?:[+-]\d+)?)([ACGTacgt])>([ACGTacgt])$").unwrap()
});
static PROTEIN_SUB: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(&format!(
        r"^(?:p\.)?\(?(?:({AA1})(\d+)({AA1}|\*)|({AA3})(\d+)({AA3}|Ter|\*))\)?$"
    ))
    .unwrap()
});
static FRAMESHIFT: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(&format!(
        r"^(?:p\.)?\(?({AA1}|{AA3})(\d+)(?:{AA1}|{AA3})?fs(?:\*|Ter|X)?\d*\)?$"
    ))
    .unwrap()
});
static DNA_OTHER: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r"^([cgmn])\.(\d+(?:_\d+)?)(del|dup|ins)([ACGTacgt]*)$").unwrap()
});
static PROTEIN_DEL: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(&format!(r"^(?:p\.)?({AA1}|{AA3})(\d+)(del|dup)$")).unwrap()
});

fn one_letter(code: &str) -> char {
    if code.len() == 1 {
        return code.chars().next().unwrap();
    }
    AMINO_ACIDS
        .iter()
        .find(|(three, _)| *three == code)
        .map(|(_, one)| *one)
        .expect("regex admits only table codes")
}

pub fn normalize_mutation(mention: &str) -> Option<MutationNorm> {
    let m = mention.trim();
    if m.is_empty() {
        return None;
    }
    let (mutation_type, normalized_name) = if let Some(c) = DBSNP.captures(m) {
        (MutationType::DbSNP, format!("rs{}", &c[1]))
    } else if let Some(c) = DNA_SUB.captures(m) {
        (
            MutationType::DNASubstitution,
            format!("{}.{}{}>{}", &c[1], &c[2], c[3].to_ascii_uppercase(), c[4].to_ascii_uppercase()),
        )
    } else if let Some(c) = PROTEIN_SUB.captures(m) {
        let (r, pos, a) = match c.get(1) {
            Some(r) => (r.as_str(), &c[2], &c[3]),
            None => (&c[4], &c[5], &c[6]),
        };
        (
            MutationType::ProteinSubstitution,
            format!("p.{}{}{}", one_letter(r), pos, one_letter(a)),
        )
    } else if let Some(c) = FRAMESHIFT.captures(m) {
        (MutationType::Frameshift, format!("p.{}{}fs", one_letter(&c[1]), &c[2]))
    } else if let Some(c) = DNA_OTHER.captures(m) {
        (
            MutationType::Other,
            format!("{}.{}{}{}", &c[1], &c[2], &c[3], c[4].to_ascii_uppercase()),
        )
    } else {
        let c = PROTEIN_DEL.captures(m)?;
        (MutationType::Other, format!("p.{}{}{}", one_letter(&c[1]), &c[2], &c[3]))
    };
    Some(MutationNorm {
        mention: m.to_string(),
        mutation_type,
        normalized_name,
    })
}
