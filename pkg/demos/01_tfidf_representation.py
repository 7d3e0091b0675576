"""Turning raw text into capped TF-IDF rows.

Tokenize a handful of sentences, drop stop-words, build vocabularies of
different sizes and look at what survives in the sparse rows.
"""

from sparsetext import StopwordList, build_corpus, build_vocabulary, tfidf_transform

texts = [
    "The match was great and the crowd loved it",
    "Great match, great goals, great night",
    "The election results surprised the pundits",
    "Voters queued for hours at the election booths",
    "Pundits argued about the match and the election",
    "A quiet night with no match and no election",
]
labels = ["sport", "sport", "politics", "politics", "politics", "sport"]

corpus = build_corpus(texts, labels, StopwordList.default())
print("classes:", corpus.labels)
for doc in corpus.documents[:2]:
    print(f"doc {doc.id} tokens after stop-words: {doc.tokens}")

# the vocabulary is ranked by document frequency, ties broken alphabetically
for k in (3, 8):
    vocab = build_vocabulary(corpus, k)
    print(f"\ntop-{k} vocabulary:", vocab.terms)
    print("  idf:", [round(float(v), 3) for v in vocab.idf_vector()])
    X = tfidf_transform(corpus, vocab)
    for doc, row in zip(corpus.documents, X.rows):
        pairs = {vocab.terms[j]: round(float(v), 3) for j, v in zip(row.indices, row.values)}
        print(f"  doc {doc.id}: {pairs}")

# terms in more than N/2 - 1 documents get a clamped IDF of 0 and vanish
print("\nnote: IDF = max(0, ln(N / (1 + DF))), so very common terms carry no weight")
