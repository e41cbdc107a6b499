//! Condition language for agent rules.
//!
//! A rule is a colon-separated list of field patterns. Each field pattern is a
//! sequence of elements: literal symbols from the task alphabet, `*` (any,
//! possibly empty, substring), `.` (exactly one symbol) and single-digit
//! back-references `1`..`9` naming an earlier wildcard.
//!
//! Wildcards (`*` and `.`) are numbered `1..=n` left to right across the whole
//! rule, so a reference in a later field can cite a wildcard bound in an
//! earlier one. In `*.*:1:*2:*` the `1` in the second field repeats the text
//! bound by the leading `*` of the first field and the `2` repeats the `.`.
//!
//! A digit that is part of the alphabet is always a literal. This lets the
//! woods task use `0`/`1` observations without clashing with references.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use thiserror::Error;

pub mod oracle;

pub use oracle::{oracle_match, ORACLE_MAX_FIELD_LEN};

/// Field separator shared by rules and world text.
pub const SEPARATOR: u8 = b':';

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PatternError {
    #[error("invalid character {ch:?} at position {position}")]
    InvalidCharacter { ch: char, position: usize },
    #[error("reference {index} at position {position} has no earlier wildcard")]
    DanglingRef { index: usize, position: usize },
    #[error("field of length {len} exceeds the oracle limit of {limit}")]
    FieldTooLong { len: usize, limit: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Element {
    Literal(u8),
    Star,
    Dot,
    /// 1-based wildcard index.
    Ref(usize),
}

impl Element {
    pub fn is_wildcard(self) -> bool {
        matches!(self, Element::Star | Element::Dot)
    }
}

impl fmt::Display for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Element::Literal(b) => write!(f, "{}", b as char),
            Element::Star => f.write_str("*"),
            Element::Dot => f.write_str("."),
            Element::Ref(i) => write!(f, "{i}"),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct FieldPattern {
    pub elements: Vec<Element>,
}

impl FieldPattern {
    pub fn new(elements: Vec<Element>) -> Self {
        Self { elements }
    }
}

fn min_len(elements: &[Element]) -> usize {
    elements
        .iter()
        .filter(|e| matches!(e, Element::Literal(_) | Element::Dot))
        .count()
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Rule {
    fields: Vec<FieldPattern>,
    wildcard_count: usize,
}

impl Rule {
    /// Builds a rule from already-structured fields, checking that every
    /// reference cites an earlier wildcard.
    pub fn from_fields(fields: Vec<FieldPattern>) -> Result<Self, PatternError> {
        let mut seen = 0usize;
        let mut position = 0usize;
        for (i, field) in fields.iter().enumerate() {
            if i > 0 {
                position += 1;
            }
            for element in &field.elements {
                match *element {
                    Element::Star | Element::Dot => seen += 1,
                    Element::Ref(index) if index == 0 || index > seen || index > 9 => {
                        return Err(PatternError::DanglingRef { index, position });
                    }
                    _ => {}
                }
                position += 1;
            }
        }
        Ok(Self {
            fields,
            wildcard_count: seen,
        })
    }

    pub fn fields(&self) -> &[FieldPattern] {
        &self.fields
    }

    pub fn arity(&self) -> usize {
        self.fields.len()
    }

    pub fn wildcard_count(&self) -> usize {
        self.wildcard_count
    }

    /// Returns a binding if the rule matches `world`, or `None`.
    ///
    /// Stars expand leftmost-shortest, so among several consistent bindings
    /// the one with the shortest early stars is returned.
    pub fn matches(&self, world: &str) -> Option<Binding> {
        let fields = split_fields(world);
        if fields.len() != self.fields.len() {
            return None;
        }
        let mut slots: Vec<Option<&[u8]>> = alloc::vec![None; self.wildcard_count];
        let mut matcher = Matcher {
            rule: self,
            world: &fields,
            slots: &mut slots,
        };
        if matcher.field(0, 0, 0, 0) {
            Some(Binding {
                values: slots.iter().map(|s| s.unwrap_or(&[]).to_vec()).collect(),
            })
        } else {
            None
        }
    }

    /// Cheap yes/no test, same semantics as [`Rule::matches`].
    pub fn is_match(&self, world: &str) -> bool {
        self.is_match_fields(&split_fields(world))
    }

    /// [`Rule::is_match`] over world text already split with [`split_fields`].
    pub fn is_match_fields(&self, fields: &[&[u8]]) -> bool {
        if fields.len() != self.fields.len() {
            return false;
        }
        let mut buf = [None; 16];
        let mut heap;
        let slots: &mut [Option<&[u8]>] = if self.wildcard_count <= buf.len() {
            &mut buf[..self.wildcard_count]
        } else {
            heap = alloc::vec![None; self.wildcard_count];
            &mut heap
        };
        Matcher {
            rule: self,
            world: fields,
            slots,
        }
        .field(0, 0, 0, 0)
    }

    /// Writes the rule back out with every wildcard and reference replaced
    /// by its bound text.
    pub fn substitute(&self, binding: &Binding) -> Option<String> {
        let mut out = Vec::new();
        let mut next = 0usize;
        for (i, field) in self.fields.iter().enumerate() {
            if i > 0 {
                out.push(SEPARATOR);
            }
            for element in &field.elements {
                match *element {
                    Element::Literal(b) => out.push(b),
                    Element::Star | Element::Dot => {
                        out.extend_from_slice(binding.values.get(next)?);
                        next += 1;
                    }
                    Element::Ref(index) => out.extend_from_slice(binding.values.get(index - 1)?),
                }
            }
        }
        String::from_utf8(out).ok()
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, field) in self.fields.iter().enumerate() {
            if i > 0 {
                f.write_str(":")?;
            }
            for element in &field.elements {
                write!(f, "{element}")?;
            }
        }
        Ok(())
    }
}

/// Text bound to each wildcard, indexed from 1.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Binding {
    values: Vec<Vec<u8>>,
}

impl Binding {
    pub fn from_values<I, S>(values: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        Self {
            values: values
                .into_iter()
                .map(|s| s.as_ref().as_bytes().to_vec())
                .collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Text bound to wildcard `index` (1-based).
    pub fn get(&self, index: usize) -> Option<&str> {
        let bytes = self.values.get(index.checked_sub(1)?)?;
        core::str::from_utf8(bytes).ok()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, &str)> + '_ {
        self.values
            .iter()
            .enumerate()
            .map(|(i, v)| (i + 1, core::str::from_utf8(v).unwrap_or("")))
    }
}

/// Parses rule text against the given literal alphabet.
///
/// Alphabet symbols must be ASCII and may not include `:`, `*` or `.`.
pub fn parse_rule(text: &str, alphabet: &str) -> Result<Rule, PatternError> {
    let alphabet = alphabet.as_bytes();
    let mut fields = Vec::new();
    let mut current = Vec::new();
    let mut seen = 0usize;
    for (position, ch) in text.char_indices() {
        if !ch.is_ascii() {
            return Err(PatternError::InvalidCharacter { ch, position });
        }
        let b = ch as u8;
        let element = match b {
            SEPARATOR => {
                fields.push(FieldPattern::new(core::mem::take(&mut current)));
                continue;
            }
            b'*' => Element::Star,
            b'.' => Element::Dot,
            _ if alphabet.contains(&b) => Element::Literal(b),
            b'1'..=b'9' => {
                let index = usize::from(b - b'0');
                if index > seen {
                    return Err(PatternError::DanglingRef { index, position });
                }
                Element::Ref(index)
            }
            _ => return Err(PatternError::InvalidCharacter { ch, position }),
        };
        if element.is_wildcard() {
            seen += 1;
        }
        current.push(element);
    }
    fields.push(FieldPattern::new(current));
    Ok(Rule {
        fields,
        wildcard_count: seen,
    })
}

/// Shorthand for `rule.matches(world)`.
pub fn match_rule(rule: &Rule, world: &str) -> Option<Binding> {
    rule.matches(world)
}

/// Splits world text on the field separator.
pub fn split_fields(world: &str) -> Vec<&[u8]> {
    world.as_bytes().split(|&b| b == SEPARATOR).collect()
}

struct Matcher<'r, 'w, 's> {
    rule: &'r Rule,
    world: &'s [&'w [u8]],
    slots: &'s mut [Option<&'w [u8]>],
}

impl<'w> Matcher<'_, 'w, '_> {
    /// Matches element `elem` of field `field` at byte offset `pos`;
    /// `wild` is the global index of the next wildcard to bind.
    fn field(&mut self, field: usize, elem: usize, pos: usize, wild: usize) -> bool {
        let Some(pattern) = self.rule.fields.get(field) else {
            return true;
        };
        let text = self.world[field];
        let Some(&element) = pattern.elements.get(elem) else {
            return pos == text.len() && self.field(field + 1, 0, 0, wild);
        };
        let rest = &text[pos..];
        match element {
            Element::Literal(b) => rest.first() == Some(&b) && self.field(field, elem + 1, pos + 1, wild),
            Element::Dot => {
                if rest.is_empty() {
                    return false;
                }
                self.slots[wild] = Some(&rest[..1]);
                self.field(field, elem + 1, pos + 1, wild + 1)
            }
            Element::Ref(index) => {
                let bound = self.slots[index - 1].unwrap_or(&[]);
                rest.starts_with(bound) && self.field(field, elem + 1, pos + bound.len(), wild)
            }
            Element::Star => {
                let tail = min_len(&pattern.elements[elem + 1..]);
                let max = rest.len().saturating_sub(tail);
                for len in 0..=max {
                    self.slots[wild] = Some(&rest[..len]);
                    if self.field(field, elem + 1, pos + len, wild + 1) {
                        return true;
                    }
                }
                false
            }
        }
    }
}
