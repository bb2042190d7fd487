//! Per-contract software metrics: line classification plus keyword-level
//! counts over a comment-stripped, string-shielded token stream.

use std::collections::HashSet;

use serde::Serialize;

use crate::corpus::ContractRecord;

pub mod lexer;

use lexer::{lex, Token};

/// Classification of one physical source line. The three kinds partition
/// the file: every line is exactly one of them.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LineClass {
    Blank,
    Comment,
    Code,
}

/// The per-contract metric values, one field per reported column.
///
/// `abi_size` and `bytecode_size` are absent (not zero) when the record
/// carries no ABI or bytecode.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MetricVector {
    pub total_lines: u64,
    pub blanks: u64,
    pub comments: u64,
    pub loc: u64,
    pub contracts: u64,
    pub functions: u64,
    pub payable: u64,
    pub events: u64,
    pub mappings: u64,
    pub modifiers: u64,
    pub address_uses: u64,
    pub cyclomatic: u64,
    pub abi_size: Option<u64>,
    pub bytecode_size: Option<u64>,
}

/// The fourteen reported metrics, in fixed table order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    TotalLines,
    Blanks,
    Functions,
    Payable,
    Events,
    Mappings,
    Modifiers,
    Contracts,
    AddressUses,
    Cyclomatic,
    Comments,
    AbiSize,
    BytecodeSize,
    Loc,
}

impl Metric {
    pub const ALL: [Metric; 14] = [
        Metric::TotalLines,
        Metric::Blanks,
        Metric::Functions,
        Metric::Payable,
        Metric::Events,
        Metric::Mappings,
        Metric::Modifiers,
        Metric::Contracts,
        Metric::AddressUses,
        Metric::Cyclomatic,
        Metric::Comments,
        Metric::AbiSize,
        Metric::BytecodeSize,
        Metric::Loc,
    ];

    /// Schema name used in table headers, JSON keys and the CLI.
    pub fn name(self) -> &'static str {
        match self {
            Metric::TotalLines => "total_lines",
            Metric::Blanks => "blanks",
            Metric::Functions => "functions",
            Metric::Payable => "payable",
            Metric::Events => "events",
            Metric::Mappings => "mappings",
            Metric::Modifiers => "modifiers",
            Metric::Contracts => "contracts",
            Metric::AddressUses => "address_uses",
            Metric::Cyclomatic => "cyclomatic",
            Metric::Comments => "comments",
            Metric::AbiSize => "abi_size",
            Metric::BytecodeSize => "bytecode_size",
            Metric::Loc => "loc",
        }
    }

    pub fn parse(name: &str) -> Option<Metric> {
        Metric::ALL.into_iter().find(|m| m.name() == name)
    }
}

impl MetricVector {
    /// Value of one metric column; `None` for absent ABI/bytecode sizes.
    pub fn value(&self, metric: Metric) -> Option<u64> {
        match metric {
            Metric::TotalLines => Some(self.total_lines),
            Metric::Blanks => Some(self.blanks),
            Metric::Functions => Some(self.functions),
            Metric::Payable => Some(self.payable),
            Metric::Events => Some(self.events),
            Metric::Mappings => Some(self.mappings),
            Metric::Modifiers => Some(self.modifiers),
            Metric::Contracts => Some(self.contracts),
            Metric::AddressUses => Some(self.address_uses),
            Metric::Cyclomatic => Some(self.cyclomatic),
            Metric::Comments => Some(self.comments),
            Metric::AbiSize => self.abi_size,
            Metric::BytecodeSize => self.bytecode_size,
            Metric::Loc => Some(self.loc),
        }
    }
}

/// Classifies every physical line of `source`.
///
/// Lines are split on `\n` and a trailing newline does not create an extra
/// line. A line is blank if it holds only whitespace, comment if all its
/// non-whitespace content lies inside `//` or `/* … */` comments (block
/// state carries across lines), and code otherwise. Comment markers inside
/// string literals do not open comments.
pub fn classify_lines(source: &str) -> Vec<LineClass> {
    classify_lines_inner(source).0
}

fn classify_lines_inner(source: &str) -> (Vec<LineClass>, bool) {
    enum State {
        Normal,
        LineComment,
        BlockComment,
        Str(char),
    }

    #[derive(Default)]
    struct LineFlags {
        code: bool,
        comment: bool,
        pending: bool,
    }

    impl LineFlags {
        fn close(&mut self, classes: &mut Vec<LineClass>) {
            classes.push(if self.code {
                LineClass::Code
            } else if self.comment {
                LineClass::Comment
            } else {
                LineClass::Blank
            });
            *self = LineFlags::default();
        }
    }

    let mut classes = Vec::new();
    let mut state = State::Normal;
    let mut flags = LineFlags::default();
    let mut chars = source.chars().peekable();

    while let Some(c) = chars.next() {
        if c == '\n' {
            flags.close(&mut classes);
            match state {
                State::LineComment | State::Str(_) => state = State::Normal,
                _ => {}
            }
            continue;
        }
        flags.pending = true;
        match state {
            State::Normal => match c {
                '/' if matches!(chars.peek(), Some('/')) => {
                    chars.next();
                    flags.comment = true;
                    state = State::LineComment;
                }
                '/' if matches!(chars.peek(), Some('*')) => {
                    chars.next();
                    flags.comment = true;
                    state = State::BlockComment;
                }
                '"' | '\'' => {
                    flags.code = true;
                    state = State::Str(c);
                }
                _ if c.is_whitespace() => {}
                _ => flags.code = true,
            },
            State::LineComment => {
                if !c.is_whitespace() {
                    flags.comment = true;
                }
            }
            State::BlockComment => {
                if c == '*' && matches!(chars.peek(), Some('/')) {
                    chars.next();
                    flags.comment = true;
                    state = State::Normal;
                } else if !c.is_whitespace() {
                    flags.comment = true;
                }
            }
            State::Str(quote) => match c {
                '\\' => {
                    flags.code = true;
                    if !matches!(chars.peek(), Some('\n')) {
                        chars.next();
                    }
                }
                _ if c == quote => {
                    flags.code = true;
                    state = State::Normal;
                }
                _ => flags.code = true,
            },
        }
    }
    if flags.pending {
        flags.close(&mut classes);
    }
    let unterminated = matches!(state, State::BlockComment);
    (classes, unterminated)
}

/// Computes the full metric vector for one record. Pure: identical source
/// always yields identical metrics.
pub fn extract_metrics(record: &ContractRecord) -> MetricVector {
    extract_metrics_detailed(record).0
}

/// As [`extract_metrics`], additionally reporting lexical diagnostics
/// (unterminated comments or strings).
pub fn extract_metrics_detailed(record: &ContractRecord) -> (MetricVector, Vec<String>) {
    let source = record.source.as_str();
    let (classes, unterminated_block) = classify_lines_inner(source);
    let total_lines = classes.len() as u64;
    let blanks = classes.iter().filter(|c| **c == LineClass::Blank).count() as u64;
    let comments = classes.iter().filter(|c| **c == LineClass::Comment).count() as u64;
    let loc = classes.iter().filter(|c| **c == LineClass::Code).count() as u64;

    let lexed = lex(source);
    let counts = count_tokens(&lexed.tokens);

    let mut diagnostics = Vec::new();
    if unterminated_block || lexed.unterminated_block_comment {
        diagnostics.push(format!(
            "{}: unterminated block comment at end of input",
            record.address
        ));
    }
    if lexed.unterminated_string {
        diagnostics.push(format!(
            "{}: string literal not terminated before end of line",
            record.address
        ));
    }

    let metrics = MetricVector {
        total_lines,
        blanks,
        comments,
        loc,
        contracts: counts.contracts,
        functions: counts.functions,
        payable: counts.payable,
        events: counts.events,
        mappings: counts.mappings,
        modifiers: counts.modifiers,
        address_uses: counts.address_uses,
        cyclomatic: 1 + counts.decision_points,
        abi_size: record
            .abi_json
            .as_ref()
            .map(|abi| abi.chars().count() as u64),
        bytecode_size: record.bytecode_hex.as_ref().map(|hex| hex.len() as u64),
    };
    (metrics, diagnostics)
}

#[derive(Default)]
struct TokenCounts {
    contracts: u64,
    functions: u64,
    payable: u64,
    events: u64,
    mappings: u64,
    modifiers: u64,
    address_uses: u64,
    decision_points: u64,
}

fn count_tokens(tokens: &[Token<'_>]) -> TokenCounts {
    let mut counts = TokenCounts::default();
    let mut event_names: HashSet<&str> = HashSet::new();
    let mut declaration_sites: HashSet<usize> = HashSet::new();

    for (i, token) in tokens.iter().enumerate() {
        match token {
            Token::Ident(name) => match *name {
                "contract" | "library" | "interface" => counts.contracts += 1,
                "function" => {
                    counts.functions += 1;
                    if header_contains_payable(tokens, i) {
                        counts.payable += 1;
                    }
                }
                "mapping" => counts.mappings += 1,
                "modifier" => counts.modifiers += 1,
                "address" => counts.address_uses += 1,
                "if" | "for" | "while" => counts.decision_points += 1,
                "event" => {
                    if let Some(Token::Ident(event_name)) = tokens.get(i + 1) {
                        event_names.insert(event_name);
                        declaration_sites.insert(i + 1);
                    }
                }
                _ => {}
            },
            Token::Punct('?') => counts.decision_points += 1,
            _ => {}
        }
    }

    for (i, token) in tokens.iter().enumerate() {
        if let Token::Ident(name) = token {
            if event_names.contains(name)
                && !declaration_sites.contains(&i)
                && matches!(tokens.get(i + 1), Some(Token::Punct('(')))
            {
                counts.events += 1;
            }
        }
    }
    counts
}

/// Tokens between `function` and the first `{` or `;` form the header.
fn header_contains_payable(tokens: &[Token<'_>], function_idx: usize) -> bool {
    for token in &tokens[function_idx + 1..] {
        match token {
            Token::Punct('{') | Token::Punct(';') => return false,
            Token::Ident("payable") => return true,
            _ => {}
        }
    }
    false
}

/// Mappings whose declared key type is `address`, i.e. `mapping(address => …)`.
/// Computed separately from [`MetricVector::mappings`], which counts every
/// `mapping` occurrence.
pub fn address_keyed_mappings(source: &str) -> u64 {
    let lexed = lex(source);
    let tokens = &lexed.tokens;
    let mut count = 0;
    for i in 0..tokens.len() {
        if tokens[i] == Token::Ident("mapping")
            && tokens.get(i + 1) == Some(&Token::Punct('('))
            && tokens.get(i + 2) == Some(&Token::Ident("address"))
        {
            count += 1;
        }
    }
    count
}
