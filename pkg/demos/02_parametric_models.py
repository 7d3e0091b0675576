"""Fisher LDA and multinomial Naive Bayes on the same TF-IDF features.

Both are parametric: LDA summarizes classes by means and a shared scatter,
NB by per-class term distributions.
"""

import numpy as np

from sparsetext import (build_vocabulary, generate_synthetic_corpus, split_stratified,
                        tfidf_transform)
from sparsetext.harness import predict_matrix
from sparsetext.metrics import confusion, precision_recall_f1, render_report
from sparsetext.parametric import lda_fit, nb_fit, nb_posterior

corpus = generate_synthetic_corpus(60, 3, vocab_per_class=10, noise_rate=0.4, seed=3)
train, test = split_stratified(corpus, 0.25, seed=3)
vocab = build_vocabulary(train, 60)
X_train, X_test = tfidf_transform(train, vocab), tfidf_transform(test, vocab)

lda = lda_fit(X_train, ridge=1e-3)
print("LDA keeps C-1 =", lda.projection.shape[1], "discriminant directions")
print("eigenvalues (between / within scatter ratio):", np.round(lda.eigenvalues, 3))
top = np.argsort(-np.abs(lda.projection[:, 0]))[:5]
print("heaviest terms on the first direction:", [vocab.terms[j] for j in top])

nb = nb_fit(X_train, alpha=1.0)
print("\nNB class priors:", np.round(np.exp(nb.log_priors), 3))
print("posterior for the first test document:", np.round(nb_posterior(nb, X_test.rows[0]), 3),
      "true class", test.documents[0].label)

for name, model in (("LDA", lda), ("Naive Bayes", nb)):
    cm = confusion(X_test.labels, predict_matrix(model, X_test), 3, corpus.labels)
    print(f"\n{name}\n" + render_report(precision_recall_f1(cm), "markdown"))
