use super::{TargetFragment, TextSpan};

const TAG_OPEN: &str = "[REPLACE";

/// One `[REPLACE value=...]` annotation found in a paragraph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReplaceTag {
    /// Where the value sits in the clean paragraph.
    pub fragment: TargetFragment,
    /// The tag exactly as written.
    pub raw: String,
    pub quoted: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("malformed [REPLACE] tag at character {offset}: {message}")]
pub struct TagError {
    /// Character offset of the tag's opening bracket.
    pub offset: usize,
    pub message: String,
}

/// Replaces every `[REPLACE value=...]` tag with its value text.
///
/// Values are either double-quoted (with `\"` and `\\` escapes) or a bare run
/// of characters other than whitespace and `]`. Returned spans are character
/// offsets into the clean paragraph.
pub fn parse_replace_tags(annotated: &str) -> Result<(String, Vec<ReplaceTag>), TagError> {
    let chars: Vec<char> = annotated.chars().collect();
    let open: Vec<char> = TAG_OPEN.chars().collect();
    let mut clean = String::new();
    let mut clean_len = 0;
    let mut tags = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        if chars[i..].starts_with(&open) {
            let (tag, next) = parse_tag(&chars, i, clean_len)?;
            clean.push_str(&tag.fragment.text);
            clean_len += tag.fragment.text.chars().count();
            tags.push(tag);
            i = next;
        } else {
            clean.push(chars[i]);
            clean_len += 1;
            i += 1;
        }
    }
    Ok((clean, tags))
}

fn parse_tag(chars: &[char], start: usize, clean_offset: usize) -> Result<(ReplaceTag, usize), TagError> {
    let err = |message: &str| TagError { offset: start, message: message.to_string() };
    let mut i = start + TAG_OPEN.chars().count();
    let skip_ws = |i: &mut usize| {
        while *i < chars.len() && chars[*i].is_whitespace() {
            *i += 1;
        }
    };
    skip_ws(&mut i);
    let key: String = chars[i..].iter().take(5).collect();
    if key != "value" {
        return Err(err(if chars.get(i) == Some(&']') { "missing value" } else { "expected `value=`" }));
    }
    i += 5;
    skip_ws(&mut i);
    if chars.get(i) != Some(&'=') {
        return Err(err("expected `=` after `value`"));
    }
    i += 1;
    skip_ws(&mut i);

    let mut value = String::new();
    let quoted = chars.get(i) == Some(&'"');
    if quoted {
        i += 1;
        loop {
            match chars.get(i) {
                None => return Err(err("unterminated quoted value")),
                Some('"') => {
                    i += 1;
                    break;
                }
                Some('\\') if matches!(chars.get(i + 1), Some('"' | '\\')) => {
                    value.push(chars[i + 1]);
                    i += 2;
                }
                Some(&c) => {
                    value.push(c);
                    i += 1;
                }
            }
        }
    } else {
        while let Some(&c) = chars.get(i) {
            if c.is_whitespace() || c == ']' || c == '[' {
                break;
            }
            value.push(c);
            i += 1;
        }
        if value.is_empty() {
            return Err(err("missing value"));
        }
    }
    skip_ws(&mut i);
    if chars.get(i) != Some(&']') {
        return Err(err("unbalanced bracket: expected `]`"));
    }
    i += 1;

    let len = value.chars().count();
    let tag = ReplaceTag {
        fragment: TargetFragment { span: TextSpan::new(clean_offset, clean_offset + len), text: value },
        raw: chars[start..i].iter().collect(),
        quoted,
    };
    Ok((tag, i))
}

/// Canonical tag text for a value.
pub fn replace_tag(value: &str, quoted: bool) -> String {
    if quoted {
        format!("[REPLACE value=\"{}\"]", value.replace('\\', "\\\\").replace('"', "\\\""))
    } else {
        format!("[REPLACE value={value}]")
    }
}

/// Inverse of [`parse_replace_tags`]: puts each tag back over its span.
pub fn annotate(clean: &str, tags: &[ReplaceTag]) -> String {
    let chars: Vec<char> = clean.chars().collect();
    let mut out = String::new();
    let mut pos = 0;
    for tag in tags {
        let span = tag.fragment.span;
        out.extend(&chars[pos..span.start]);
        out.push_str(&tag.raw);
        pos = span.end;
    }
    out.extend(&chars[pos..]);
    out
}
