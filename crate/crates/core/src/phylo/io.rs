use std::collections::HashMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{PhyloError, PhyloTree};

/// One Newick line per root. Branch lengths are origin-time deltas; a root
/// carries its own origin time as its length.
pub fn export_newick(t: &PhyloTree) -> String {
    let mut out = String::new();
    for root in t.roots() {
        write_newick_node(t, root, &mut out);
        out.push_str(";\n");
    }
    out
}

fn write_newick_node(t: &PhyloTree, root: usize, out: &mut String) {
    // Iterative to cope with deep ladders.
    enum Step {
        Enter(usize),
        Sep,
        Exit(usize),
    }
    let mut stack = vec![Step::Enter(root)];
    while let Some(step) = stack.pop() {
        match step {
            Step::Enter(i) => {
                let kids = t.children(i);
                if kids.is_empty() {
                    stack.push(Step::Exit(i));
                    continue;
                }
                out.push('(');
                stack.push(Step::Exit(i));
                for (k, &c) in kids.iter().enumerate().rev() {
                    stack.push(Step::Enter(c));
                    if k > 0 {
                        stack.push(Step::Sep);
                    }
                }
            }
            Step::Sep => out.push(','),
            Step::Exit(i) => {
                if !t.is_leaf(i) {
                    out.push(')');
                }
                if let Some(label) = &t.node(i).taxon_label {
                    out.push_str(&quote_label(label));
                }
                let length = match t.parent(i) {
                    Some(_) => t.branch_length(i),
                    None => t.node(i).origin_time,
                };
                let _ = write!(out, ":{length}");
            }
        }
    }
}

fn quote_label(label: &str) -> String {
    let plain = !label.is_empty()
        && label
            .chars()
            .all(|c| !c.is_whitespace() && !"()[]':;,".contains(c));
    if plain {
        label.to_string()
    } else {
        format!("'{}'", label.replace('\'', "''"))
    }
}

struct RawNode {
    label: Option<String>,
    length: u64,
    children: Vec<usize>,
}

struct NewickParser<'a> {
    text: &'a [u8],
    pos: usize,
    nodes: Vec<RawNode>,
}

impl NewickParser<'_> {
    fn err<T>(&self, message: impl Into<String>) -> Result<T, PhyloError> {
        Err(PhyloError::Newick {
            offset: self.pos,
            message: message.into(),
        })
    }

    fn skip_ws(&mut self) {
        while self.pos < self.text.len() && self.text[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.text.get(self.pos).copied()
    }

    fn subtree(&mut self) -> Result<usize, PhyloError> {
        let mut children = Vec::new();
        if self.peek() == Some(b'(') {
            self.pos += 1;
            loop {
                children.push(self.subtree()?);
                match self.peek() {
                    Some(b',') => self.pos += 1,
                    Some(b')') => {
                        self.pos += 1;
                        break;
                    }
                    _ => return self.err("expected `,` or `)`"),
                }
            }
        }
        let label = self.label()?;
        let length = if self.peek() == Some(b':') {
            self.pos += 1;
            self.length()?
        } else {
            0
        };
        self.nodes.push(RawNode {
            label,
            length,
            children,
        });
        Ok(self.nodes.len() - 1)
    }

    fn label(&mut self) -> Result<Option<String>, PhyloError> {
        match self.peek() {
            Some(b'\'') => {
                self.pos += 1;
                let mut bytes = Vec::new();
                loop {
                    match self.text.get(self.pos) {
                        None => return self.err("unterminated quoted label"),
                        Some(b'\'') if self.text.get(self.pos + 1) == Some(&b'\'') => {
                            bytes.push(b'\'');
                            self.pos += 2;
                        }
                        Some(b'\'') => {
                            self.pos += 1;
                            break;
                        }
                        Some(&b) => {
                            bytes.push(b);
                            self.pos += 1;
                        }
                    }
                }
                match String::from_utf8(bytes) {
                    Ok(s) => Ok(Some(s)),
                    Err(_) => self.err("label is not UTF-8"),
                }
            }
            _ => {
                let start = self.pos;
                while let Some(&b) = self.text.get(self.pos) {
                    if b.is_ascii_whitespace() || b"()[]':;,".contains(&b) {
                        break;
                    }
                    self.pos += 1;
                }
                if start == self.pos {
                    return Ok(None);
                }
                match std::str::from_utf8(&self.text[start..self.pos]) {
                    Ok(s) => Ok(Some(s.to_string())),
                    Err(_) => self.err("label is not UTF-8"),
                }
            }
        }
    }

    fn length(&mut self) -> Result<u64, PhyloError> {
        self.skip_ws();
        let start = self.pos;
        while let Some(&b) = self.text.get(self.pos) {
            if b.is_ascii_digit() || b == b'.' || b == b'e' || b == b'E' || b == b'+' || b == b'-' {
                self.pos += 1;
            } else {
                break;
            }
        }
        let token = std::str::from_utf8(&self.text[start..self.pos]).unwrap_or("");
        if let Ok(v) = token.parse::<u64>() {
            return Ok(v);
        }
        match token.parse::<f64>() {
            Ok(v) if v >= 0.0 && v.fract() == 0.0 && v < u64::MAX as f64 => Ok(v as u64),
            _ => self.err(format!(
                "branch length `{token}` is not a whole number of generations"
            )),
        }
    }
}

/// Parses one or more semicolon-terminated Newick trees into a forest.
pub fn import_newick(text: &str) -> Result<PhyloTree, PhyloError> {
    let mut parser = NewickParser {
        text: text.as_bytes(),
        pos: 0,
        nodes: Vec::new(),
    };
    let mut roots = Vec::new();
    while parser.peek().is_some() {
        roots.push(parser.subtree()?);
        if parser.peek() != Some(b';') {
            return parser.err("expected `;`");
        }
        parser.pos += 1;
    }
    if roots.is_empty() {
        return parser.err("no tree found");
    }
    let nodes = parser.nodes;
    let mut tree = PhyloTree::new();
    for root in roots {
        let mut stack = vec![(root, None, 0u64)];
        while let Some((raw, parent, base)) = stack.pop() {
            let node = &nodes[raw];
            let origin = base + node.length;
            let index = tree.add_node(parent, origin, node.label.clone(), None)?;
            for &c in node.children.iter().rev() {
                stack.push((c, Some(index), origin));
            }
        }
    }
    Ok(tree)
}

#[derive(Debug, Serialize, Deserialize)]
struct AlifeRow {
    id: u64,
    ancestor_list: String,
    origin_time: u64,
    taxon_label: Option<String>,
    founder_tag: Option<u16>,
}

/// ALife-standard phylogeny CSV, one row per node, parents before children.
pub fn export_alife_csv(t: &PhyloTree) -> String {
    let mut writer = csv::Writer::from_writer(Vec::new());
    for i in t.preorder() {
        let node = t.node(i);
        let ancestor_list = match node.parent {
            Some(p) => format!("[{}]", t.node(p).id),
            None => "[none]".to_string(),
        };
        writer
            .serialize(AlifeRow {
                id: node.id,
                ancestor_list,
                origin_time: node.origin_time,
                taxon_label: node.taxon_label.clone(),
                founder_tag: node.founder_tag,
            })
            .expect("in-memory csv write");
    }
    String::from_utf8(writer.into_inner().expect("in-memory csv flush")).expect("csv is utf-8")
}

/// Reads an ALife-standard phylogeny CSV. Rows may come in any order; node
/// ids are preserved. Row numbers in errors count the header as row 1.
pub fn import_alife_csv(text: &str) -> Result<PhyloTree, PhyloError> {
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let mut rows = Vec::new();
    for (k, record) in reader.deserialize::<AlifeRow>().enumerate() {
        let row = k + 2;
        let record = record.map_err(|e| PhyloError::Csv {
            row,
            message: e.to_string(),
        })?;
        let parent = parse_ancestor_list(&record.ancestor_list)
            .map_err(|message| PhyloError::Csv { row, message })?;
        rows.push((row, record, parent));
    }
    if rows.is_empty() {
        return Err(PhyloError::Csv {
            row: 1,
            message: "no nodes".into(),
        });
    }
    let mut by_id: HashMap<u64, usize> = HashMap::new();
    for (k, (row, record, _)) in rows.iter().enumerate() {
        if by_id.insert(record.id, k).is_some() {
            return Err(PhyloError::Csv {
                row: *row,
                message: format!("duplicate id {}", record.id),
            });
        }
    }
    let mut children: Vec<Vec<usize>> = vec![Vec::new(); rows.len()];
    let mut roots = Vec::new();
    for (k, (row, _, parent)) in rows.iter().enumerate() {
        match parent {
            None => roots.push(k),
            Some(p) => match by_id.get(p) {
                Some(&pk) => children[pk].push(k),
                None => {
                    return Err(PhyloError::Csv {
                        row: *row,
                        message: format!("unknown ancestor {p}"),
                    })
                }
            },
        }
    }
    let mut tree = PhyloTree::new();
    let mut placed = 0;
    let mut stack: Vec<(usize, Option<usize>)> = roots.iter().rev().map(|&r| (r, None)).collect();
    while let Some((k, parent)) = stack.pop() {
        let (row, record, _) = &rows[k];
        let index = tree
            .add_node_with_id(
                record.id,
                parent,
                record.origin_time,
                record.taxon_label.clone(),
                record.founder_tag,
            )
            .map_err(|e| PhyloError::Csv {
                row: *row,
                message: e.to_string(),
            })?;
        placed += 1;
        for &c in children[k].iter().rev() {
            stack.push((c, Some(index)));
        }
    }
    if placed != rows.len() {
        let stray = (0..rows.len())
            .find(|&k| !tree.nodes().iter().any(|n| n.id == rows[k].1.id))
            .map(|k| rows[k].0)
            .unwrap_or(1);
        return Err(PhyloError::Csv {
            row: stray,
            message: "ancestry cycle".into(),
        });
    }
    Ok(tree)
}

fn parse_ancestor_list(s: &str) -> Result<Option<u64>, String> {
    let inner = s
        .trim()
        .strip_prefix('[')
        .and_then(|s| s.strip_suffix(']'))
        .ok_or_else(|| format!("ancestor_list `{s}` is not bracketed"))?
        .trim();
    if inner.is_empty() || inner.eq_ignore_ascii_case("none") {
        return Ok(None);
    }
    if inner.contains(',') {
        return Err(format!("ancestor_list `{s}` has more than one parent"));
    }
    inner
        .parse::<u64>()
        .map(Some)
        .map_err(|_| format!("ancestor_list `{s}` is not an id"))
}


#[cfg(test)]
mod tests {
    use super::random::random_tree;
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn cherry() -> PhyloTree {
        let mut t = PhyloTree::new();
        let r = t.add_node(None, 0, None, None).unwrap();
        t.add_node(Some(r), 10, Some("A".into()), None).unwrap();
        t.add_node(Some(r), 10, Some("B".into()), None).unwrap();
        t
    }

    #[test]
    fn cherry_newick() {
        assert_eq!(export_newick(&cherry()), "(A:10,B:10):0;\n");
    }

    #[test]
    fn nested_newick() {
        let t = import_newick("((A:2,B:3)x:4,C:1)r:5;").unwrap();
        assert_eq!(export_newick(&t), "((A:2,B:3)x:4,C:1)r:5;\n");
        assert_eq!(t.node(0).origin_time, 5);
        assert_eq!(t.node(2).origin_time, 11);
    }

    #[test]
    fn quoted_labels() {
        let mut t = PhyloTree::new();
        let r = t.add_node(None, 0, None, None).unwrap();
        t.add_node(Some(r), 1, Some("it's (odd)".into()), None)
            .unwrap();
        t.add_node(Some(r), 1, Some("plain".into()), None).unwrap();
        let text = export_newick(&t);
        assert_eq!(text, "('it''s (odd)':1,plain:1):0;\n");
        assert_eq!(import_newick(&text).unwrap(), t);
    }

    #[test]
    fn newick_errors() {
        assert!(import_newick("").is_err());
        assert!(import_newick("(A:1,B:1)").is_err());
        assert!(import_newick("(A:1,B:x);").is_err());
        assert!(import_newick("(A:1.5);").is_err());
        assert_eq!(import_newick("(A:2.0);").unwrap().node(1).origin_time, 2);
    }

    #[test]
    fn alife_root_row() {
        let csv = export_alife_csv(&cherry());
        let mut lines = csv.lines();
        assert_eq!(
            lines.next().unwrap(),
            "id,ancestor_list,origin_time,taxon_label,founder_tag"
        );
        assert_eq!(lines.next().unwrap(), "0,[none],0,,");
        assert_eq!(lines.next().unwrap(), "1,[0],10,A,");
    }

    #[test]
    fn alife_any_row_order() {
        let text = "id,ancestor_list,origin_time,taxon_label,founder_tag\n\
                    7,[3],9,leaf,12\n\
                    3,[],1,,\n";
        let t = import_alife_csv(text).unwrap();
        assert_eq!(t.len(), 2);
        assert_eq!(t.node(0).id, 3);
        assert_eq!(t.node(1).founder_tag, Some(12));
    }

    #[test]
    fn alife_errors_name_rows() {
        let head = "id,ancestor_list,origin_time,taxon_label,founder_tag\n";
        let cases = [
            (format!("{head}0,[none],0,,\n1,[9],1,,\n"), 3),
            (format!("{head}0,[none],0,,\n0,[0],1,,\n"), 3),
            (format!("{head}0,[none],x,,\n"), 2),
            (format!("{head}0,none,0,,\n"), 2),
            (format!("{head}0,[none],5,,\n1,[0],4,,\n"), 3),
            (format!("{head}0,[1],0,,\n1,[0],0,,\n"), 2),
        ];
        for (text, row) in cases {
            match import_alife_csv(&text) {
                Err(PhyloError::Csv { row: got, .. }) => assert_eq!(got, row, "{text}"),
                other => panic!("expected csv error for {text:?}, got {other:?}"),
            }
        }
        assert!(import_alife_csv(head).is_err());
    }

    #[test]
    fn round_trips_on_random_trees() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let t = random_tree(&mut rng, 40).normalized();
            assert_eq!(import_alife_csv(&export_alife_csv(&t)).unwrap(), t);
            let mut bare = PhyloTree::new();
            for n in t.nodes() {
                bare.add_node(n.parent, n.origin_time, n.taxon_label.clone(), None)
                    .unwrap();
            }
            assert_eq!(import_newick(&export_newick(&t)).unwrap(), bare);
        }
    }
}
