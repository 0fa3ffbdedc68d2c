"""Model size and inference FLOP accounting.

Embedding cost is excluded. For each PCA block with input dimension ``m`` and
``n`` kept components:

* parameters: ``m * n`` projection weights plus the ``m``-dim mean,
  bounded above by ``m ** 2``;
* FLOPs: ``2 * m * n``.

A second convention evaluates the FLOP term with the kept dimension on both
sides (``2 * n * n``); it is reported as ``flops_square`` next to the exact
count.

The tree ensemble uses one comparison per level plus one addition per tree and
class, and counts two parameters per split node and one per leaf.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from gwpt import gbdt


@dataclass(frozen=True)
class PcaBlockSpec:
    name: str
    input_dim: int
    output_dim: int | None  # None: raw block, no PCA

    @property
    def params(self) -> int:
        if self.output_dim is None:
            return 0
        return self.input_dim * self.output_dim + self.input_dim

    @property
    def params_bound(self) -> int:
        return 0 if self.output_dim is None else self.input_dim ** 2

    @property
    def flops(self) -> int:
        return 0 if self.output_dim is None else 2 * self.input_dim * self.output_dim

    @property
    def flops_square(self) -> int:
        return 0 if self.output_dim is None else 2 * self.output_dim ** 2


@dataclass(frozen=True)
class AccountSpec:
    blocks: tuple[PcaBlockSpec, ...]
    n_trees: int
    max_depth: int
    n_classes: int
    # exact counts over stored trees, when a fitted model is available
    model_params: int | None = None
    model_flops: int | None = None


@dataclass
class Row:
    component: str
    params: int
    params_bound: int
    flops: int
    flops_square: int

    def as_dict(self) -> dict:
        return {
            "component": self.component,
            "params": self.params,
            "params_bound": self.params_bound,
            "flops": self.flops,
            "flops_square": self.flops_square,
        }


@dataclass
class AccountTable:
    rows: list[Row]
    blocks: list[dict] = field(default_factory=list)
    model_params: int | None = None
    model_flops: int | None = None

    def row(self, component: str) -> Row:
        for r in self.rows:
            if r.component == component:
                return r
        raise KeyError(component)

    def bound_by_band(self) -> dict[str, int]:
        out: dict[str, int] = {}
        for b in self.blocks:
            band = b["name"].split("-", 1)[0]
            out[band] = out.get(band, 0) + b["params_bound"]
        return out

    def as_dict(self) -> dict:
        return {
            "rows": [r.as_dict() for r in self.rows],
            "blocks": self.blocks,
            "model_params": self.model_params,
            "model_flops": self.model_flops,
        }

    def format(self) -> str:
        header = ("Component", "Params", "Params bound", "FLOPs", "FLOPs (n*n)")
        body = [
            (r.component, f"{r.params:,}", f"{r.params_bound:,}", f"{r.flops:,}", f"{r.flops_square:,}")
            for r in self.rows
        ]
        widths = [max(len(str(c)) for c in col) for col in zip(header, *body)]
        lines = ["  ".join(str(c).ljust(w) if i == 0 else str(c).rjust(w)
                           for i, (c, w) in enumerate(zip(line, widths)))
                 for line in [header, *body]]
        lines.insert(1, "  ".join("-" * w for w in widths))
        for b in self.blocks:
            if b["output_dim"] is not None:
                lines.append(
                    f"  PCA {b['name']}: {b['input_dim']} -> {b['output_dim']}, "
                    f"bound ({b['input_dim']})^2 = {b['params_bound']:,}"
                )
        if self.model_params is not None:
            lines.append(f"  stored trees: {self.model_params:,} params, "
                         f"{self.model_flops:,} worst-case FLOPs")
        return "\n".join(lines)


def account(spec: AccountSpec) -> AccountTable:
    ngram = Row(
        "Adaptive N-gram",
        sum(b.params for b in spec.blocks),
        sum(b.params_bound for b in spec.blocks),
        sum(b.flops for b in spec.blocks),
        sum(b.flops_square for b in spec.blocks),
    )
    tree_params = spec.n_trees * gbdt.full_tree_params(spec.max_depth) * spec.n_classes if spec.n_trees else 0
    tree_flops = gbdt.flops_formula(spec.n_trees, spec.max_depth, spec.n_classes)
    boost = Row("XGBoost", tree_params, tree_params, tree_flops, tree_flops)
    total = Row(
        "Total",
        ngram.params + boost.params,
        ngram.params_bound + boost.params_bound,
        ngram.flops + boost.flops,
        ngram.flops_square + boost.flops_square,
    )
    blocks = [
        {
            "name": b.name,
            "input_dim": b.input_dim,
            "output_dim": b.output_dim,
            "params": b.params,
            "params_bound": b.params_bound,
            "flops": b.flops,
        }
        for b in spec.blocks
    ]
    return AccountTable([ngram, boost, total], blocks, spec.model_params, spec.model_flops)


def spec_from_model(pipeline, model: gbdt.GbdtModel) -> AccountSpec:
    """Account spec of a fitted feature pipeline and booster."""
    blocks = tuple(
        PcaBlockSpec(b.name, b.input_dim, None if b.pca is None else b.pca.k)
        for b in pipeline.blocks
    )
    return AccountSpec(
        blocks,
        model.n_trees_per_class,
        model.max_depth,
        model.n_classes,
        gbdt.count_params(model),
        gbdt.exact_flops(model),
    )


# fastText on UD: mid band of 255 dims with a PCA'd 2-gram, high band of 40
# dims with PCA'd 2- and 3-grams, 5000 depth-3 trees per class, 17 UPOS tags.
FASTTEXT_UD = AccountSpec(
    blocks=(
        PcaBlockSpec("mid-1gram", 255, None),
        PcaBlockSpec("mid-2gram", 255 * 2, 490),
        PcaBlockSpec("high-1gram", 40, None),
        PcaBlockSpec("high-2gram", 40 * 2, 80),
        PcaBlockSpec("high-3gram", 40 * 3, 120),
    ),
    n_trees=5000,
    max_depth=3,
    n_classes=17,
)

PRESET_ACCOUNTS = {"fasttext-ud": FASTTEXT_UD}
