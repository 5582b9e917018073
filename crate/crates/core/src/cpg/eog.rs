//! Evaluation-order edges. Operands precede their operators, statements are
//! chained in order, and a block is evaluated after its last statement.

use super::graph::{CpgGraph, EdgeLabel, Label, NodeId};

type Frontier = Vec<NodeId>;

pub(crate) fn pass_eog(g: &mut CpgGraph) {
    let entries: Vec<NodeId> = g
        .nodes()
        .iter()
        .filter(|n| n.has(Label::Function) || n.has(Label::Modifier))
        .map(|n| n.id)
        .collect();
    let mut b = Builder { g, loops: Vec::new() };
    for f in entries {
        if let Some(body) = b.g.target(f, EdgeLabel::Body) {
            b.statement(body, vec![f]);
        }
    }
}

struct Loop {
    continue_to: NodeId,
    breaks: Frontier,
}

struct Builder<'g> {
    g: &'g mut CpgGraph,
    loops: Vec<Loop>,
}

fn union(mut a: Frontier, b: Frontier) -> Frontier {
    for x in b {
        if !a.contains(&x) {
            a.push(x);
        }
    }
    a
}

impl Builder<'_> {
    fn connect(&mut self, frontier: &[NodeId], n: NodeId) -> Frontier {
        for &p in frontier {
            self.g.ensure_edge(p, n, EdgeLabel::Eog);
        }
        vec![n]
    }

    fn is_statement_kind(&self, n: NodeId) -> bool {
        let node = self.g.node(n);
        [
            Label::Block,
            Label::If,
            Label::For,
            Label::While,
            Label::Do,
            Label::Return,
            Label::Emit,
            Label::Break,
            Label::Continue,
            Label::DeclarationStatement,
            Label::InlineAssembly,
            Label::Placeholder,
        ]
        .iter()
        .any(|l| node.has(*l))
            || (node.has(Label::Rollback) && self.g.ast_parent(n).is_some_and(|p| !self.g.node(p).has(Label::Call)))
    }

    /// Sub-expressions evaluated before `n`, in order.
    fn operands(&self, n: NodeId) -> Vec<NodeId> {
        let g = &*self.g;
        let node = g.node(n);
        let one = |l: EdgeLabel| g.target(n, l).into_iter().collect::<Vec<_>>();
        if node.has(Label::Call) {
            let mut v = one(EdgeLabel::Callee);
            v.extend(g.targets(n, EdgeLabel::Arguments));
            v
        } else if node.has(Label::Specified) {
            let mut v = one(EdgeLabel::Base);
            v.extend(one(EdgeLabel::Callee));
            v.extend(g.targets(n, EdgeLabel::Specifiers));
            v
        } else if node.has(Label::KeyValue) {
            one(EdgeLabel::Value)
        } else if node.has(Label::Member) {
            one(EdgeLabel::Base)
        } else if node.has(Label::Subscript) {
            let mut v = one(EdgeLabel::ArrayExpression);
            v.extend(one(EdgeLabel::SubscriptExpression));
            v
        } else if node.has(Label::BinaryOperator) {
            let mut v = one(EdgeLabel::Lhs);
            v.extend(one(EdgeLabel::Rhs));
            v
        } else if node.has(Label::UnaryOperator) {
            one(EdgeLabel::Input)
        } else if node.has(Label::ExpressionList) || node.has(Label::Emit) {
            g.ast_children(n)
        } else if node.has(Label::Return) {
            one(EdgeLabel::ReturnValue)
        } else {
            Vec::new()
        }
    }

    /// First node evaluated when control enters `n`.
    fn entry(&self, n: NodeId) -> NodeId {
        let g = &*self.g;
        let node = g.node(n);
        if node.has(Label::If) || node.has(Label::While) || node.has(Label::Conditional) {
            return g.target(n, EdgeLabel::Condition).map_or(n, |c| self.entry(c));
        }
        if node.has(Label::For) {
            return g
                .target(n, EdgeLabel::InitializerStatement)
                .or_else(|| g.target(n, EdgeLabel::Condition))
                .map_or(n, |c| self.entry(c));
        }
        if node.has(Label::Do) {
            return n;
        }
        if node.has(Label::Block) {
            return g.ast_children(n).first().map_or(n, |&c| self.entry(c));
        }
        if node.has(Label::DeclarationStatement) {
            let decls = g.targets(n, EdgeLabel::Declarations);
            let first = decls
                .iter()
                .find_map(|&d| g.target(d, EdgeLabel::Initializer))
                .or_else(|| decls.first().copied());
            return first.map_or(n, |c| self.entry(c));
        }
        self.operands(n).first().map_or(n, |&c| self.entry(c))
    }

    fn statement(&mut self, n: NodeId, frontier: Frontier) -> Frontier {
        if !self.is_statement_kind(n) {
            return self.expression(n, frontier);
        }
        let node = self.g.node(n).clone();
        if node.has(Label::Block) {
            let mut f = frontier;
            for c in self.g.ast_children(n) {
                f = self.statement(c, f);
            }
            return if f.is_empty() { f } else { self.connect(&f, n) };
        }
        if node.has(Label::If) {
            let mut f = frontier;
            if let Some(c) = self.g.target(n, EdgeLabel::Condition) {
                f = self.expression(c, f);
            }
            let f = self.connect(&f, n);
            let then_f = match self.g.target(n, EdgeLabel::ThenStatement) {
                Some(t) => self.statement(t, f.clone()),
                None => f.clone(),
            };
            let else_f = match self.g.target(n, EdgeLabel::ElseStatement) {
                Some(e) => self.statement(e, f.clone()),
                None => f,
            };
            return union(then_f, else_f);
        }
        if node.has(Label::While) || node.has(Label::For) {
            let mut f = frontier;
            if let Some(init) = self.g.target(n, EdgeLabel::InitializerStatement) {
                f = self.statement(init, f);
            }
            let cond = self.g.target(n, EdgeLabel::Condition);
            let head = cond.map_or(n, |c| self.entry(c));
            if let Some(c) = cond {
                f = self.expression(c, f);
            }
            let f = self.connect(&f, n);
            let update = self.g.target(n, EdgeLabel::IterationStatement);
            let continue_to = update.map_or(head, |u| self.entry(u));
            self.loops.push(Loop { continue_to, breaks: Vec::new() });
            let mut bf = match self.g.target(n, EdgeLabel::Statement) {
                Some(b) => self.statement(b, f.clone()),
                None => f.clone(),
            };
            if let Some(u) = update {
                bf = self.statement(u, bf);
            }
            self.connect(&bf, head);
            let l = self.loops.pop().expect("loop frame");
            return union(vec![n], l.breaks);
        }
        if node.has(Label::Do) {
            let f = self.connect(&frontier, n);
            let cond = self.g.target(n, EdgeLabel::Condition);
            let continue_to = cond.map_or(n, |c| self.entry(c));
            self.loops.push(Loop { continue_to, breaks: Vec::new() });
            let mut bf = match self.g.target(n, EdgeLabel::Statement) {
                Some(b) => self.statement(b, f),
                None => f,
            };
            if let Some(c) = cond {
                bf = self.expression(c, bf);
            }
            self.connect(&bf, n);
            let l = self.loops.pop().expect("loop frame");
            return union(bf, l.breaks);
        }
        if node.has(Label::DeclarationStatement) {
            let mut f = frontier;
            let mut done = Vec::new();
            for d in self.g.targets(n, EdgeLabel::Declarations) {
                if let Some(init) = self.g.target(d, EdgeLabel::Initializer) {
                    if !done.contains(&init) {
                        f = self.expression(init, f);
                        done.push(init);
                    }
                }
                f = self.connect(&f, d);
            }
            return self.connect(&f, n);
        }
        if node.has(Label::Return) {
            let mut f = frontier;
            if let Some(v) = self.g.target(n, EdgeLabel::ReturnValue) {
                f = self.expression(v, f);
            }
            self.connect(&f, n);
            return Vec::new();
        }
        if node.has(Label::Rollback) {
            self.connect(&frontier, n);
            return Vec::new();
        }
        if node.has(Label::Break) {
            self.connect(&frontier, n);
            if let Some(l) = self.loops.last_mut() {
                l.breaks.push(n);
                return Vec::new();
            }
            return vec![n];
        }
        if node.has(Label::Continue) {
            self.connect(&frontier, n);
            if let Some(target) = self.loops.last().map(|l| l.continue_to) {
                self.connect(&[n], target);
                return Vec::new();
            }
            return vec![n];
        }
        // emit, placeholders, assembly
        let mut f = frontier;
        for o in self.operands(n) {
            f = self.expression(o, f);
        }
        self.connect(&f, n)
    }

    fn expression(&mut self, n: NodeId, frontier: Frontier) -> Frontier {
        if self.g.node(n).has(Label::Conditional) {
            let mut f = frontier;
            if let Some(c) = self.g.target(n, EdgeLabel::Condition) {
                f = self.expression(c, f);
            }
            let f = self.connect(&f, n);
            let branches: Vec<NodeId> = self
                .g
                .ast_children(n)
                .into_iter()
                .filter(|&c| Some(c) != self.g.target(n, EdgeLabel::Condition))
                .collect();
            let mut out = Vec::new();
            for b in branches {
                let bf = self.expression(b, f.clone());
                out = union(out, bf);
            }
            return out;
        }
        let mut f = frontier;
        for o in self.operands(n) {
            f = self.expression(o, f);
        }
        let f = self.connect(&f, n);
        let rollback = self
            .g
            .ast_children(n)
            .into_iter()
            .find(|&c| self.g.node(c).has(Label::Rollback));
        if let Some(rb) = rollback {
            self.g.ensure_edge(n, rb, EdgeLabel::Eog);
            if matches!(self.g.node(n).local_name(), "revert") {
                return Vec::new();
            }
        }
        f
    }
}
