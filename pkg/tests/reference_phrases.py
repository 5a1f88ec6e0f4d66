"""Frozen copy of the published lexical indicators, grouped by lexicon file and category."""

PHRASES = {
    "dp11_definitions": {
        "Definition": [
            "cookies are small text files",
            "cookies are small files",
            "cookies (small text files",
            "cookies contain",
            "cookies hold",
            "cookies identify",
            "cookies track",
            "Cookies and other tools store or retrieve personal data",
            "script (e.g. cookies)",
            "script such as cookies",
            "small files called cookies",
            "A cookie is a small text file"
        ]
    },
    "dp12_purposes": {
        "Analytics": [
            "for analytics",
            "to analyze website traffic",
            "to analyze user behavior",
            "for collecting statistical data",
            "for monitoring site performance",
            "to analyze traffic",
            "to assess the performance of ads",
            "to access personal data for analytics",
            "analyse site traffic",
            "analze our traffic",
            "for statistical purposes",
            "for measuring performance",
            "measure site performance",
            "for A/B testing"
        ],
        "Advertising/Targeting": [
            "for marketing",
            "for advertising",
            "to deliver targeted ads",
            "for better targeting",
            "for retargeting",
            "for affiliate marketing",
            "for improving ads efficiency",
            "for customizing advertisements",
            "to serve advertising",
            "profiling",
            "personalized advertising",
            "interest-based advertising",
            "relevant personalized advertisements",
            "third party advertising purposes",
            "to access personal data for advertising",
            "advertising cookies",
            "to show relevant ads"
        ],
        "Personalization/Experience": [
            "to personalize content",
            "to personalize",
            "for personalization",
            "to remember your preferences",
            "remember their preferences",
            "personalization of communication",
            "to improve user experience",
            "to help improve your experience",
            "to improve your experience",
            "to provide you with the best experience",
            "to tailor content and ads",
            "to enhance site content",
            "store and access information",
            "to provide content recommendations",
            "to recommend products",
            "cookies save your preferences",
            "cookies help websites remember",
            "cookies allow websites",
            "personalize our site",
            "to enhance"
        ],
        "Functionality/Performance": [
            "for functional purposes",
            "for functionality",
            "for site functionality",
            "improve site functionality",
            "to optimize our website",
            "to improve site performance",
            "for site security",
            "Authentication and security",
            "to process device information",
            "process personal data",
            "to access personal data for social engineering",
            "to maintain session state",
            "for session management",
            "to enable website features",
            "to enable features like chat",
            "for managing your shopping cart",
            "to facilitate payment processing",
            "for user authentication",
            "to support customer support",
            "to provide social media features",
            "for better site navigation",
            "proper operation of the website",
            "to deliver and enhance the quality of services",
            "to provide better services",
            "creating custom content profile",
            "for geo-targeting",
            "to gather demographic information",
            "to track usage",
            "to track affiliate links",
            "performance cookies",
            "functionality cookies",
            "optimizing",
            "remember your settings"
        ]
    },
    "dp13_pricing": {
        "Pay": [
            "subscribe",
            "subscription",
            "pay",
            "price",
            "pricing",
            "per month",
            "per week",
            "per year",
            "trial",
            "ad-free",
            "premium",
            "€",
            "$"
        ],
        "Consent": [
            "cookie",
            "cookies",
            "consent",
            "tracking",
            "reject",
            "refuse",
            "deny",
            "opt-out",
            "without ads",
            "without tracking",
            "without advertising",
            "ad-free",
            "with ads",
            "with tracking",
            "purchase"
        ]
    },
    "dp17_legal": {
        "LegalBasis": [
            "GDPR Article 6",
            "legitimate interest (GDPR)",
            "contract performance for cookies",
            "legitimate interest (data protection regulation)",
            "cookie processing under GDPR",
            "ccpa consent",
            "edpb guidelines",
            "processing based on consent",
            "GDPR",
            "gdpr",
            "edpb",
            "EDPB",
            "eprivacy",
            "cookie tracking consent",
            "article 6",
            "article",
            "ccpa",
            "legal basis for cookies",
            "legitimate interest (gdpr)",
            "consent to cookie use",
            "data processing consent under GDPR",
            "CCPA",
            "California Consumer Privacy Act (CCPA)",
            "article 7",
            "Article 6 (1)",
            "CCPA consent",
            "GDPR Article 6 (1)(a)",
            "california notice at collection",
            "Addiotional disclosures for california residents",
            "Consent to Cookie Use (GDPR)",
            "ePrivacy Regulation",
            "ePrivacy compliant",
            "EDPB Guidelines",
            "EDPB Recommendations",
            "European Data Protection Board"
        ],
        "Activity": [
            "process personal data",
            "collect personal data",
            "track personal data",
            "use personal data",
            "store personal data",
            "access personal data",
            "retrieve personal data",
            "share personal data",
            "transfer personal data",
            "analyze personal data",
            "manage personal data",
            "process cookies",
            "track cookies",
            "store cookies",
            "track user behavior",
            "personalize content",
            "serve personalized ads",
            "advertise products",
            "recommend products",
            "measure website usage",
            "analyze traffic",
            "monitor traffic",
            "optimize user experience",
            "monitor website performance",
            "content personalization",
            "geo-targeting",
            "personalized content",
            "tracking technologies",
            "user tracking",
            "user profiling",
            "process your data",
            "targeted advertising profiling",
            "process user's data",
            "advertising profiling",
            "consumer profiling",
            "behavioral targeting"
        ]
    }
}
