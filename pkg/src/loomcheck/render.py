"""Text trace and Graphviz DOT views of a derivation forest."""

from __future__ import annotations

from .engine import DerivationForest, EdgeKind, TreeStatus, render_goal


def trace_lines(forest: DerivationForest) -> list[str]:
    lines = [str(event) for event in forest.trace]
    if forest.truncated:
        lines.append(f"  ... truncated after {forest.budget_spent} expansions")
    return lines


def _quote(text: str) -> str:
    return '"' + text.replace("\\", "\\\\").replace('"', '\\"').replace("\n", "\\n") + '"'


def _node_label(forest: DerivationForest, nid) -> str:
    node = forest.nodes[nid]
    if node.mark is None:
        return f"{nid}: {render_goal(node.goal)}"
    if node.goal:
        # a negative-subgoal node closed as LAST keeps its goal
        return f"{nid}: {render_goal(node.goal)}\n{node.mark.value}"
    return f"{nid}: {node.mark.value}"


def to_dot(forest: DerivationForest, name: str | None = None) -> str:
    """Render the forest: one cluster per SLDNF*-tree, dashed subsidiary links."""
    title = name if name is not None else f"← {forest.query}"
    out = [f"digraph {_quote(title)} {{"]
    out.append('  node [shape=box, fontname="monospace"];')
    if forest.truncated:
        out.append(f'  label={_quote(f"truncated after {forest.budget_spent} expansions")};')
    for tree in forest.trees:
        out.append(f"  subgraph cluster_T{tree.id} {{")
        tree_label = f"T{tree.id}: {render_goal(forest.nodes[tree.root].goal)}"
        if tree.status is TreeStatus.TRUNCATED:
            tree_label += " (truncated)"
        out.append(f"    label={_quote(tree_label)};")
        out.append("    style=dotted;")
        for nid in tree.nodes:
            out.append(f"    {nid} [label={_quote(_node_label(forest, nid))}];")
        out.append("  }")
    for tree in forest.trees:
        for nid in tree.nodes:
            for edge, child in forest.nodes[nid].children:
                label = edge.label if edge.kind is EdgeKind.CLAUSE else ""
                attrs = f" [label={_quote(label)}]" if label else ""
                out.append(f"  {nid} -> {child}{attrs};")
        for nid, sub in tree.subsidiary_links.items():
            root = forest.trees[sub].root
            out.append(f'  {nid} -> {root} [style=dashed, label="subsidiary"];')
    out.append("}")
    return "\n".join(out) + "\n"
