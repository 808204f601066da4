from setuptools import setup, find_packages


def scm_version():
    def local_scheme(version):
        if version.tag and not version.distance:
            return version.format_with("")
        else:
            return version.format_choice("+{node}", "+{node}.dirty")
    return {
        "relative_to": __file__,
        "version_scheme": "guess-next-dev",
        "local_scheme": local_scheme,
        "fallback_version": "0.0",
    }


setup(
    name="optitest",
    use_scm_version=scm_version(),
    description="Optimal adaptive testing policies for epidemics under an infection ceiling",
    #long_description="""TODO""",
    license="BSD",
    python_requires=">=3.7",
    setup_requires=["setuptools_scm"],
    install_requires=[
        "numpy>=1.17",
        "scipy>=1.6",
        "jinja2>=2.10",
        "joblib>=0.14",
    ],
    entry_points={
        "console_scripts": [
            "optitest=optitest.tools.cli:main",
        ]
    },
    packages=find_packages(),
    zip_safe=False,
    include_package_data=True,
)
