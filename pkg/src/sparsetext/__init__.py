"""TF-IDF sparse text representations and four classifiers built from scratch.

Parametric: Fisher LDA and multinomial Naive Bayes.
Non-parametric: CART decision tree and an SMO-trained SVM.
"""

from .corpus import (Corpus, Document, StopwordList, build_corpus, load_csv, remove_stopwords,
                     split_stratified, subsample_stratified, tokenize)
from .harness import (ExperimentConfig, RunRecord, emit_tables, generate_synthetic_corpus,
                      run_experiment)
from .metrics import ConfusionMatrix, MetricsReport, confusion, precision_recall_f1, render_report
from .nonparametric import (Kernel, SvmBinaryModel, SvmMulticlassModel, TreeModel, TreeParams,
                            gini_impurity, rbf_kernel, svm_fit_binary, svm_fit_ovr, svm_predict,
                            tree_fit, tree_predict)
from .parametric import LdaModel, NbModel, lda_fit, lda_predict, nb_fit, nb_predict
from .persist import load_bundle, load_model, save_model
from .vectorize import (SparseMatrix, SparseVector, Vocabulary, build_vocabulary,
                        inverse_document_frequency, term_frequency, tfidf_transform)

__version__ = "0.1.0"
