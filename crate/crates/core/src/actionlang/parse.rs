use std::fmt;

use serde::{Deserialize, Serialize};

use super::{Action, Verb};

/// Why a planner response could not be turned into an action.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ParseFailure {
    MissingSections,
    BadCommand,
    UnknownVerb,
    BadArity,
    /// The planner did not answer in time.
    Timeout,
}

impl ParseFailure {
    pub fn as_str(self) -> &'static str {
        match self {
            ParseFailure::MissingSections => "missing-sections",
            ParseFailure::BadCommand => "bad-command",
            ParseFailure::UnknownVerb => "unknown-verb",
            ParseFailure::BadArity => "bad-arity",
            ParseFailure::Timeout => "timeout",
        }
    }
}

impl fmt::Display for ParseFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Structured planner answer: analysis, reasoning and the final command line.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlannerResponse {
    pub analysis: String,
    pub reasoning: String,
    pub command: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Header {
    Analysis,
    Reasoning,
    Command,
}

/// Recognizes `Analysis:`, `Reasoning:` and `Command:` header lines,
/// tolerating markdown emphasis or heading marks and any letter case.
fn header_of(line: &str) -> Option<(Header, &str)> {
    let t = line.trim_start().trim_start_matches(['#', '*', ' ']);
    let colon = t.find(':')?;
    let (name, rest) = t.split_at(colon);
    let name = name.trim_end_matches(['*', ' ']).to_ascii_lowercase();
    let rest = rest[1..].trim_start_matches('*');
    let h = match name.as_str() {
        "analysis" => Header::Analysis,
        "reasoning" => Header::Reasoning,
        "command" => Header::Command,
        _ => return None,
    };
    Some((h, rest))
}

/// Splits a response into its sections and parses the final command.
///
/// Without any headers the whole text is treated as the command section. With
/// headers, `Command:` must be present, appear once, and come after any
/// analysis or reasoning header. The command is the last non-empty line of
/// its section.
pub fn parse_response(text: &str) -> Result<(PlannerResponse, Action), ParseFailure> {
    if text.trim().is_empty() {
        return Err(ParseFailure::MissingSections);
    }
    let lines: Vec<&str> = text.lines().collect();
    let headers: Vec<(usize, Header, &str)> = lines
        .iter()
        .enumerate()
        .filter_map(|(i, l)| header_of(l).map(|(h, rest)| (i, h, rest)))
        .collect();

    let section = |which: Header| -> Option<Vec<&str>> {
        let pos = headers.iter().position(|(_, h, _)| *h == which)?;
        let (start, _, inline) = headers[pos];
        let end = headers.get(pos + 1).map_or(lines.len(), |(i, _, _)| *i);
        let mut body = vec![inline];
        body.extend_from_slice(&lines[start + 1..end]);
        Some(body)
    };

    let command_lines: Vec<&str> = if headers.is_empty() {
        lines.clone()
    } else {
        let kinds: Vec<Header> = headers.iter().map(|(_, h, _)| *h).collect();
        let ordered = kinds.windows(2).all(|w| w[0] < w[1]);
        if !ordered || !kinds.contains(&Header::Command) {
            return Err(ParseFailure::MissingSections);
        }
        section(Header::Command).unwrap_or_default()
    };
    let command = command_lines
        .iter()
        .rev()
        .map(|l| l.trim())
        .find(|l| !l.is_empty())
        .ok_or(ParseFailure::MissingSections)?;
    let action = parse_command(command)?;
    let join = |h| {
        section(h)
            .map(|body| body.join("\n").trim().to_string())
            .unwrap_or_default()
    };
    Ok((
        PlannerResponse {
            analysis: join(Header::Analysis),
            reasoning: join(Header::Reasoning),
            command: command.to_string(),
        },
        action,
    ))
}

fn valid_name(s: &str) -> bool {
    !s.is_empty()
        && s
            .chars()
            .all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_' || c == '-')
}

/// Parses a single `verb(args)` command line.
pub fn parse_command(line: &str) -> Result<Action, ParseFailure> {
    let line = line.trim().trim_matches('`').trim();
    let line = line.strip_suffix(['.', ';']).unwrap_or(line).trim_end();
    let open = line.find('(').ok_or(ParseFailure::BadCommand)?;
    let body = line.strip_suffix(')').ok_or(ParseFailure::BadCommand)?;
    if body.len() < open {
        return Err(ParseFailure::BadCommand);
    }
    let verb_text = line[..open].trim().to_ascii_lowercase();
    if verb_text.is_empty()
        || !verb_text
            .chars()
            .all(|c| c.is_ascii_lowercase() || c == '_')
    {
        return Err(ParseFailure::BadCommand);
    }
    let inner = &body[open + 1..];
    let args: Vec<String> = if inner.trim().is_empty() {
        Vec::new()
    } else {
        inner
            .split(',')
            .map(|a| {
                a.trim()
                    .trim_matches(|c| c == '"' || c == '\'')
                    .to_ascii_lowercase()
            })
            .collect()
    };
    if !args.iter().all(|a| valid_name(a)) {
        return Err(ParseFailure::BadCommand);
    }
    let verb = Verb::from_name(&verb_text).ok_or(ParseFailure::UnknownVerb)?;
    if args.len() != verb.arity() {
        return Err(ParseFailure::BadArity);
    }
    let mut args = args.into_iter();
    let mut next = || args.next().expect("arity checked");
    Ok(match verb {
        Verb::Navigate => Action::Navigate {
            room: next(),
            object: next(),
        },
        Verb::GoToAndOpen => Action::GoToAndOpen {
            room: next(),
            object: next(),
        },
        Verb::Close => Action::Close,
        Verb::Explore => Action::Explore { room: next() },
        Verb::Done => Action::Done,
    })
}
