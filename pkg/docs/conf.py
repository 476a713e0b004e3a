# Sphinx configuration of the sslab documentation.

import os
import sys
sys.path.insert(0, os.path.abspath('..'))

project = 'Short-Sale Lab'
copyright = '2026, sslab developers'
author = 'sslab developers'
release = '0.1.0'

extensions = ['sphinx.ext.autodoc', 'sphinx.ext.napoleon', 'sphinx.ext.viewcode']
autodoc_member_order = 'bysource'
autodoc_mock_imports = ['sklearn']

templates_path = ['_templates']
exclude_patterns = ['_build']

html_theme = 'sphinx_rtd_theme'
html_title = 'sslab {}'.format(release)
