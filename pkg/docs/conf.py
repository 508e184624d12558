# Configuration file for the Sphinx documentation builder.
#
# For the full list of options see
# https://www.sphinx-doc.org/en/master/usage/configuration.html

from datetime import datetime
import importlib_metadata

# -- Project information -----------------------------------------------------

project = 'wdro-opf'
author = 'wdro-opf developers'
copyright = '%s, %s' % (datetime.now().year, author)

# The full version, including alpha/beta/rc tags
release = importlib_metadata.version('wdro-opf')


# -- General configuration ---------------------------------------------------

extensions = [
    'sphinx_rtd_theme',
    'sphinx.ext.autodoc',
    'sphinx.ext.mathjax',
    'sphinxcontrib.apidoc',
]

apidoc_module_dir = '../wdro_opf'
apidoc_output_dir = 'api_reference'
apidoc_excluded_paths = ['cases']
apidoc_separate_modules = True
apidoc_extra_args = ["-H", "API Reference"]

templates_path = ['_templates']

exclude_patterns = ['_build', 'Thumbs.db', '.DS_Store']


# -- Options for HTML output -------------------------------------------------

html_theme = 'sphinx_rtd_theme'
html_theme_path = ["_themes", ]

html_static_path = ['_static']

# console transcripts and case files are the common blocks, so no highlighting
# unless a block asks for it
highlight_language = "none"
