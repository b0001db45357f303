use proptest::prelude::*;
use pubkg::affilparse::{
    inherit_affiliations, parse_affiliation, AffiliationFields, AffiliationType, ParsedAffiliation, MAILBOX,
};

fn record(pmid: u64, and_id: u64, year: Option<i32>, with_fields: bool) -> ParsedAffiliation {
    let fields = if with_fields {
        AffiliationFields {
            institution: Some(format!("Inst {pmid}")),
            country: Some("Germany".into()),
            affiliation_type: AffiliationType::Edu,
            latitude: Some(1.0),
            longitude: Some(2.0),
            ..Default::default()
        }
    } else {
        AffiliationFields::default()
    };
    ParsedAffiliation {
        pmid,
        au_order: 1,
        and_id: Some(and_id),
        affiliation_order: 1,
        pub_year: year,
        raw: if with_fields { format!("Inst {pmid}, Germany") } else { String::new() },
        fields,
        inherited: false,
    }
}

fn records() -> impl Strategy<Value = Vec<ParsedAffiliation>> {
    prop::collection::vec((0u64..5, prop::option::of(2005i32..2022), any::<bool>()), 0..40).prop_map(|v| {
        v.into_iter()
            .enumerate()
            .map(|(i, (and_id, year, f))| record(i as u64 + 1, and_id, year, f))
            .collect()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn inheritance_only_fills_eligible_records(original in records(), cutoff in 2008i32..2020) {
        let mut recs = original.clone();
        let rep = inherit_affiliations(&mut recs, cutoff);
        prop_assert!(rep.covered_after >= rep.covered_before);
        prop_assert_eq!(rep.covered_after - rep.covered_before, rep.inherited_instances);
        for (before, after) in original.iter().zip(&recs) {
            if !after.inherited {
                prop_assert_eq!(before, after);
                continue;
            }
            prop_assert!(!before.fields.has_fields());
            prop_assert!(after.fields.has_fields());
            prop_assert!(before.pub_year.is_some_and(|y| y >= cutoff));
            let and_id = before.and_id.unwrap();
            prop_assert!(and_id != 0);
            // the source is a pre-cutoff record of the same author
            let src = original.iter().find(|r| {
                r.and_id == Some(and_id)
                    && r.pub_year.is_some_and(|y| y < cutoff)
                    && r.fields.institution == after.fields.institution
            });
            prop_assert!(src.is_some());
        }
        let mut again = recs.clone();
        let rep2 = inherit_affiliations(&mut again, cutoff);
        prop_assert_eq!(rep2.inherited_instances, 0);
        prop_assert_eq!(again, recs);
    }

    #[test]
    fn parsing_never_panics_and_email_is_a_mailbox(s in "[A-Za-z0-9 ,.;@é()-]{0,80}") {
        let f = parse_affiliation(&s);
        if let Some(e) = &f.email {
            prop_assert!(MAILBOX.is_match(e));
        }
        prop_assert_eq!(f.latitude.is_some(), f.longitude.is_some());
        prop_assert_eq!(parse_affiliation(&s), f);
    }
}
