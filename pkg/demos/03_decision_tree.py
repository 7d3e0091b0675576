"""A CART tree grown with Gini impurity on sparse TF-IDF columns."""

from sparsetext import build_vocabulary, generate_synthetic_corpus, tfidf_transform
from sparsetext.nonparametric import TreeParams, TreeSplit, gini_impurity, tree_fit

corpus = generate_synthetic_corpus(30, 3, vocab_per_class=6, noise_rate=0.2, seed=5)
vocab = build_vocabulary(corpus, 30)
X = tfidf_transform(corpus, vocab)

print("root impurity:", round(gini_impurity(corpus.class_counts()), 4))
model = tree_fit(X, TreeParams(max_depth=3))
print(f"depth {model.depth()}, {model.n_leaves()} leaves\n")


def show(node, indent=""):
    if isinstance(node, TreeSplit):
        print(f"{indent}{vocab.terms[node.feature]} <= {node.threshold:.4f}?")
        show(node.left, indent + "  yes: ")
        show(node.right, indent + "  no:  ")
    else:
        print(f"{indent}leaf -> {corpus.labels[node.label]} {node.class_counts}")


show(model.root)
# absent terms are zeros, so a document without the root term always goes left
