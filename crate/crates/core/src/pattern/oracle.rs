//! Exhaustive reference matcher.
//!
//! Enumerates every way of cutting each world field into one piece per
//! pattern element and keeps the first cut that is consistent with all
//! literals, dots and references. Exponential, so field length is capped.

use alloc::vec;
use alloc::vec::Vec;

use super::{split_fields, Binding, Element, PatternError, Rule};

/// Longest world field the oracle accepts.
pub const ORACLE_MAX_FIELD_LEN: usize = 8;

pub fn oracle_match(rule: &Rule, world: &str) -> Result<Option<Binding>, PatternError> {
    let fields = split_fields(world);
    if let Some(len) = fields
        .iter()
        .map(|f| f.len())
        .find(|&len| len > ORACLE_MAX_FIELD_LEN)
    {
        return Err(PatternError::FieldTooLong {
            len,
            limit: ORACLE_MAX_FIELD_LEN,
        });
    }
    if fields.len() != rule.arity() {
        return Ok(None);
    }
    let mut bound: Vec<Option<Vec<u8>>> = vec![None; rule.wildcard_count()];
    if search(rule, &fields, 0, 0, &mut bound) {
        Ok(Some(Binding {
            values: bound.into_iter().map(Option::unwrap_or_default).collect(),
        }))
    } else {
        Ok(None)
    }
}

fn search(
    rule: &Rule,
    fields: &[&[u8]],
    field: usize,
    first_wildcard: usize,
    bound: &mut Vec<Option<Vec<u8>>>,
) -> bool {
    if field == fields.len() {
        return true;
    }
    let elements = &rule.fields()[field].elements;
    let text = fields[field];
    let wildcards_here = elements.iter().filter(|e| e.is_wildcard()).count();
    for cuts in segmentations(text.len(), elements.len()) {
        let saved = bound.clone();
        if assign(elements, text, &cuts, first_wildcard, bound)
            && search(rule, fields, field + 1, first_wildcard + wildcards_here, bound)
        {
            return true;
        }
        *bound = saved;
    }
    false
}

/// Checks one segmentation of a field; binds its wildcards on success.
fn assign(
    elements: &[Element],
    text: &[u8],
    cuts: &[usize],
    mut wildcard: usize,
    bound: &mut [Option<Vec<u8>>],
) -> bool {
    for (i, element) in elements.iter().enumerate() {
        let piece = &text[cuts[i]..cuts[i + 1]];
        match *element {
            Element::Literal(b) => {
                if piece != [b] {
                    return false;
                }
            }
            Element::Dot => {
                if piece.len() != 1 {
                    return false;
                }
                bound[wildcard] = Some(piece.to_vec());
                wildcard += 1;
            }
            Element::Star => {
                bound[wildcard] = Some(piece.to_vec());
                wildcard += 1;
            }
            Element::Ref(index) => match &bound[index - 1] {
                Some(value) if value.as_slice() == piece => {}
                _ => return false,
            },
        }
    }
    true
}

/// All non-decreasing boundary vectors `0 = c0 <= c1 <= .. <= ck = len`.
fn segmentations(len: usize, pieces: usize) -> Vec<Vec<usize>> {
    if pieces == 0 {
        return if len == 0 { vec![vec![0]] } else { Vec::new() };
    }
    let mut out = Vec::new();
    let mut current = vec![0];
    fill(len, pieces, &mut current, &mut out);
    out
}

fn fill(len: usize, pieces: usize, current: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if current.len() == pieces {
        current.push(len);
        out.push(current.clone());
        current.pop();
        return;
    }
    let last = *current.last().unwrap_or(&0);
    for cut in last..=len {
        current.push(cut);
        fill(len, pieces, current, out);
        current.pop();
    }
}
