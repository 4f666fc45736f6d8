//! Raw source handling and the normalization pass that runs before parsing.

use crate::diag::{Diagnostic, Severity};

/// A game file plus an index of line-start byte offsets.
///
/// All preprocessing transforms are length-preserving, so the same
/// `line_index` is valid for raw and preprocessed text and diagnostics
/// can always point into the original file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SourceText {
    pub raw: String,
    pub line_index: Vec<usize>,
}

impl SourceText {
    pub fn new(raw: impl Into<String>) -> Self {
        let raw = raw.into();
        let mut line_index = vec![0usize];
        for (i, b) in raw.bytes().enumerate() {
            if b == b'\n' {
                line_index.push(i + 1);
            }
        }
        SourceText { raw, line_index }
    }

    /// 1-based line number containing the byte offset.
    pub fn line_of(&self, offset: usize) -> usize {
        match self.line_index.binary_search(&offset) {
            Ok(i) => i + 1,
            Err(i) => i,
        }
    }

    /// Iterate `(line_number, line_text)` with 1-based numbering.
    pub fn lines(&self) -> impl Iterator<Item = (usize, &str)> {
        self.raw.lines().enumerate().map(|(i, l)| (i + 1, l))
    }
}

/// Normalize a game file ahead of parsing:
///
/// * parenthesized (nestable) comments are blanked out;
/// * a stray `|` between kernels (`] | [`) on a rule line is dropped;
/// * a line detector between kernels (`] ... [`) is folded into the
///   left kernel so `...` gets a cell of its own;
/// * everything is lower-cased except text following a `message` keyword.
///
/// Every transform replaces bytes in place, so offsets and the line
/// index carry over unchanged and the pass is idempotent.
pub fn preprocess(source: &SourceText) -> Result<SourceText, Diagnostic> {
    let mut bytes = source.raw.clone().into_bytes();

    strip_comments(&mut bytes, source)?;

    // Quirk fixes only make sense on rule lines; identify them by `->`.
    // Lines before the first section header form the prelude, where only
    // the key word is case-folded (titles and author names keep case).
    let mut in_prelude = true;
    let mut start = 0usize;
    while start < bytes.len() {
        let end = bytes[start..]
            .iter()
            .position(|&b| b == b'\n')
            .map(|p| start + p)
            .unwrap_or(bytes.len());
        let line = &mut bytes[start..end];
        if in_prelude && is_section_boundary(line) {
            in_prelude = false;
        }
        let is_rule_line = find_arrow(line).is_some();
        if is_rule_line {
            fix_kernel_quirks(line);
        }
        if in_prelude && !is_rule_line {
            lowercase_first_word(line);
        } else {
            lowercase_line(line);
        }
        start = end + 1;
    }

    let raw = String::from_utf8(bytes).expect("length-preserving ascii transforms");
    Ok(SourceText { raw, line_index: source.line_index.clone() })
}

fn strip_comments(bytes: &mut [u8], source: &SourceText) -> Result<(), Diagnostic> {
    let mut depth = 0usize;
    let mut open_at = 0usize;
    for (i, b) in bytes.iter_mut().enumerate() {
        match *b {
            b'(' => {
                if depth == 0 {
                    open_at = i;
                }
                depth += 1;
                *b = b' ';
            }
            b')' if depth > 0 => {
                depth -= 1;
                *b = b' ';
            }
            b'\n' => {} // keep line structure inside comments
            _ if depth > 0 => *b = b' ',
            _ => {}
        }
    }
    if depth > 0 {
        return Err(Diagnostic {
            severity: Severity::Error,
            section: None,
            line: source.line_of(open_at),
            message: "unbalanced comment: '(' is never closed".into(),
        });
    }
    Ok(())
}

fn find_arrow(line: &[u8]) -> Option<usize> {
    line.windows(2).position(|w| w == b"->")
}

/// A section header keyword or an `====` divider line.
fn is_section_boundary(line: &[u8]) -> bool {
    let trimmed: Vec<u8> = line.iter().copied().filter(|b| !b.is_ascii_whitespace()).collect();
    if trimmed.len() >= 3 && trimmed.iter().all(|&b| b == b'=') {
        return true;
    }
    const SECTIONS: [&[u8]; 7] =
        [b"objects", b"legend", b"sounds", b"collisionlayers", b"rules", b"winconditions", b"levels"];
    SECTIONS.iter().any(|s| trimmed.eq_ignore_ascii_case(s))
}

fn lowercase_first_word(line: &mut [u8]) {
    for b in line.iter_mut() {
        if b.is_ascii_whitespace() {
            break;
        }
        b.make_ascii_lowercase();
    }
}

/// Rewrites `] | [` to `]   [` (dropping the stray bar) and `] ... [` to
/// `| ... |` (merging the kernels around a line detector). Both rewrites
/// touch exactly the delimiter bytes.
fn fix_kernel_quirks(line: &mut [u8]) {
    let mut i = 0;
    while i < line.len() {
        if line[i] != b']' {
            i += 1;
            continue;
        }
        let mut j = i + 1;
        while j < line.len() && line[j] == b' ' {
            j += 1;
        }
        if j < line.len() && line[j] == b'|' {
            let mut k = j + 1;
            while k < line.len() && line[k] == b' ' {
                k += 1;
            }
            if k < line.len() && line[k] == b'[' {
                line[j] = b' ';
                i = k;
                continue;
            }
        }
        if j + 2 < line.len() && &line[j..j + 3] == b"..." {
            let mut k = j + 3;
            while k < line.len() && line[k] == b' ' {
                k += 1;
            }
            if k < line.len() && line[k] == b'[' {
                line[i] = b'|';
                line[k] = b'|';
                i = k;
                continue;
            }
        }
        i += 1;
    }
}

/// Lower-case a line, preserving anything after a `message` keyword.
fn lowercase_line(line: &mut [u8]) {
    let keep_from = message_tail_start(line).unwrap_or(line.len());
    for b in &mut line[..keep_from] {
        b.make_ascii_lowercase();
    }
}

/// Byte offset just past the `message` keyword, if the line contains one
/// as a standalone word.
fn message_tail_start(line: &[u8]) -> Option<usize> {
    const KW: &[u8] = b"message";
    let n = line.len();
    let mut i = 0;
    while i + KW.len() <= n {
        let boundary_before = i == 0 || !line[i - 1].is_ascii_alphanumeric();
        if boundary_before && line[i..i + KW.len()].eq_ignore_ascii_case(KW) {
            let after = i + KW.len();
            let boundary_after = after == n || !line[after].is_ascii_alphanumeric();
            if boundary_after {
                return Some(after);
            }
        }
        i += 1;
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pre(s: &str) -> String {
        preprocess(&SourceText::new(s)).unwrap().raw
    }

    #[test]
    fn strips_nested_comments() {
        assert_eq!(pre("a (x (y) z) b"), "a           b");
    }

    #[test]
    fn unbalanced_comment_reports_line() {
        let err = preprocess(&SourceText::new("ok\n( oops\nmore")).unwrap_err();
        assert_eq!(err.line, 2);
    }

    #[test]
    fn drops_stray_bar_between_kernels() {
        assert_eq!(pre("[ > Player ] | [ Crate ] -> [ A ] [ B ]"), "[ > player ]   [ crate ] -> [ a ] [ b ]");
    }

    #[test]
    fn folds_line_detector_between_kernels() {
        assert_eq!(pre("[ Player ]...[ Exit ] -> [ Player ]...[ Exit ]"), "[ player |...| exit ] -> [ player |...| exit ]");
        assert_eq!(pre("[ P ] ... [ E ] -> [ P ] ... [ E ]"), "[ p | ... | e ] -> [ p | ... | e ]");
    }

    #[test]
    fn identity_modulo_casing_when_no_quirks() {
        let s = "OBJECTS\nWall\nbrown\n\nPlayer\nBlue";
        assert_eq!(pre(s), s.to_lowercase());
    }

    #[test]
    fn prelude_values_keep_case() {
        assert_eq!(pre("Title Lime Rick\nAUTHOR Someone Nice\n====\nOBJECTS"), "title Lime Rick\nauthor Someone Nice\n====\nobjects");
    }

    #[test]
    fn message_text_keeps_case() {
        assert_eq!(pre("MESSAGE Hello World"), "message Hello World");
        assert_eq!(pre("[ A ] -> [ B ] MESSAGE You Win!"), "[ a ] -> [ b ] message You Win!");
    }

    #[test]
    fn idempotent() {
        let s = "Rules ( c(c)c )\n[ > Player ] | [ Crate ] -> [ P ]...[ Q ]\nMESSAGE Mixed Case";
        let once = pre(s);
        assert_eq!(pre(&once), once);
    }

    #[test]
    fn length_preserved() {
        let s = "abc (comment) def\n[ A ]...[ B ] -> [ A ]...[ B ]";
        assert_eq!(pre(s).len(), s.len());
    }
}
