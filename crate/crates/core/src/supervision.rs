//! Topic filtering and distant supervision from profile tags.
//!
//! A post is on-topic when it mentions at least two distinct terminology
//! terms. Each on-topic post inherits the stance of its author, and the
//! author's stance comes from their profile tags.

use std::collections::{BTreeMap, HashSet};

use crate::corpus::UserProfile;
use crate::preprocess::Document;
use crate::resources::{TagLexicon, TermList};
use crate::stance::Stance;

/// Distinct terminology tokens required for a post to count as on-topic.
pub const MIN_TOPIC_TERMS: usize = 2;

pub fn is_tcm_topic(doc: &Document, terminology: &TermList) -> bool {
    let hits: HashSet<&str> = doc
        .tokens
        .iter()
        .map(String::as_str)
        .filter(|t| terminology.contains(t))
        .collect();
    hits.len() >= MIN_TOPIC_TERMS
}

/// Stance implied by a user's tags. Tags absent from the lexicon are
/// ignored; no stance-bearing tags or conflicting ones yield `None`.
pub fn user_stance<S: AsRef<str>>(tags: &[S], lexicon: &TagLexicon) -> Option<Stance> {
    let mut found = None;
    for stance in tags.iter().filter_map(|t| lexicon.stance_of(t.as_ref())) {
        match found {
            None => found = Some(stance),
            Some(prev) if prev != stance => return None,
            Some(_) => {}
        }
    }
    found
}

/// Documents with a label, plus the stance of every labelable user.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LabeledDataset {
    pub documents: Vec<Document>,
    pub users: BTreeMap<String, Stance>,
}

impl LabeledDataset {
    pub fn label(&self, i: usize) -> Stance {
        self.documents[i]
            .label
            .expect("labeled dataset documents carry labels")
    }

    pub fn labels(&self) -> Vec<Stance> {
        (0..self.documents.len()).map(|i| self.label(i)).collect()
    }

    pub fn class_count(&self, stance: Stance) -> usize {
        self.documents
            .iter()
            .filter(|d| d.label == Some(stance))
            .count()
    }

    /// Rebuilds a dataset from already-labeled documents (e.g. read back
    /// from JSONL). Documents without a label are dropped.
    pub fn from_documents(docs: Vec<Document>) -> Self {
        let documents: Vec<Document> = docs.into_iter().filter(|d| d.label.is_some()).collect();
        let users = documents
            .iter()
            .map(|d| (d.user_id.clone(), d.label.unwrap()))
            .collect();
        LabeledDataset { documents, users }
    }
}

/// Keeps on-topic documents only.
pub fn filter_topic(docs: Vec<Document>, terminology: &TermList) -> Vec<Document> {
    docs.into_iter()
        .filter(|d| is_tcm_topic(d, terminology))
        .collect()
}

/// Labels each document with its author's stance. Documents by authors
/// without a stance (unknown, untagged or conflicting) form the returned
/// remainder, in input order.
pub fn label_corpus(
    docs: Vec<Document>,
    users: &[UserProfile],
    lexicon: &TagLexicon,
) -> (LabeledDataset, Vec<Document>) {
    let stances: BTreeMap<String, Stance> = users
        .iter()
        .filter_map(|u| user_stance(&u.tags, lexicon).map(|s| (u.user_id.clone(), s)))
        .collect();
    let mut labeled = LabeledDataset::default();
    let mut remainder = Vec::new();
    for mut doc in docs {
        match stances.get(&doc.user_id) {
            Some(&stance) => {
                doc.label = Some(stance);
                labeled.users.insert(doc.user_id.clone(), stance);
                labeled.documents.push(doc);
            }
            None => {
                doc.label = None;
                remainder.push(doc);
            }
        }
    }
    (labeled, remainder)
}
